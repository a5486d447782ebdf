// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/evalmetrics/meteor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace adfg::evalmetrics {

namespace {

struct State {
    std::vector<std::uint64_t> used;
    std::int32_t prev_ref = -1;  // reference index of the previous candidate token, -1 when unmatched
    std::int64_t exact = 0;
    std::int64_t total = 0;
    std::int64_t chunks = 0;
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;

    bool is_used(std::size_t j) const { return (used[j / 64] >> (j % 64)) & 1U; }
    void mark(std::size_t j) { used[j / 64] |= std::uint64_t{1} << (j % 64); }
    auto rank() const { return std::make_tuple(exact, total, -chunks); }
};

}  // namespace

MeteorDetail meteor_detail(const Tokens& candidate, const Tokens& reference) {
    MeteorDetail d;
    if (candidate.empty() || reference.empty()) return d;
    std::vector<std::string> cstem, rstem;
    for (const auto& t : candidate) cstem.push_back(light_stem(t));
    for (const auto& t : reference) rstem.push_back(light_stem(t));

    State init;
    init.used.assign((reference.size() + 63) / 64, 0);
    std::vector<State> beam{init};
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        std::map<std::pair<std::vector<std::uint64_t>, std::int32_t>, State> next;
        auto offer = [&next](State s) {
            auto key = std::make_pair(s.used, s.prev_ref);
            auto it = next.find(key);
            if (it == next.end()) {
                next.emplace(std::move(key), std::move(s));
            } else if (s.rank() > it->second.rank()) {
                it->second = std::move(s);
            }
        };
        for (const State& s : beam) {
            State skip = s;
            skip.prev_ref = -1;
            offer(std::move(skip));
            for (std::size_t j = 0; j < reference.size(); ++j) {
                if (s.is_used(j)) continue;
                const bool exact = candidate[i] == reference[j];
                if (!exact && cstem[i] != rstem[j]) continue;
                State m = s;
                m.mark(j);
                m.exact += exact ? 1 : 0;
                ++m.total;
                const auto jj = static_cast<std::int32_t>(j);
                if (s.prev_ref < 0 || s.prev_ref + 1 != jj) ++m.chunks;
                m.prev_ref = jj;
                m.pairs.emplace_back(static_cast<std::int32_t>(i), jj);
                offer(std::move(m));
            }
        }
        beam.clear();
        for (auto& [k, s] : next) beam.push_back(std::move(s));
        if (beam.size() > kMeteorBeam) {
            std::stable_sort(beam.begin(), beam.end(),
                             [](const State& a, const State& b) { return a.rank() > b.rank(); });
            beam.resize(kMeteorBeam);
        }
    }
    const State* best = &beam.front();
    for (const State& s : beam) {
        if (s.rank() > best->rank()) best = &s;
    }
    d.matches = best->total;
    d.exact_matches = best->exact;
    d.chunks = best->chunks;
    d.alignment = best->pairs;
    if (d.matches == 0) return d;
    const auto m = static_cast<double>(d.matches);
    d.precision = m / static_cast<double>(candidate.size());
    d.recall = m / static_cast<double>(reference.size());
    d.f_mean = 10.0 * d.precision * d.recall / (d.recall + 9.0 * d.precision);
    d.penalty = 0.5 * std::pow(static_cast<double>(d.chunks) / m, 3.0);
    d.score = d.f_mean * (1.0 - d.penalty);
    return d;
}

MeteorDetail meteor_detail(std::string_view candidate, std::string_view reference) {
    return meteor_detail(metric_tokens(candidate), metric_tokens(reference));
}

double meteor(std::string_view candidate, std::string_view reference) {
    return meteor_detail(candidate, reference).score;
}

}  // namespace adfg::evalmetrics
