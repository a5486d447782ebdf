// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <random>

#include "doctest.h"

#include "adfg/common/error.hpp"
#include "adfg/common/text_io.hpp"
#include "adfg/ranking/borda.hpp"
#include "adfg/ranking/score_csv.hpp"

using namespace adfg;
using namespace adfg::ranking;

namespace {

const std::filesystem::path kFixtures = std::filesystem::path(ADFG_DATA_DIR) / "fixtures" / "benchmark";

/// Per metric a candidate earns one point per strictly worse rival and half a
/// point per tied rival.
std::map<std::string, double> pairwise_points(const ScoreMatrix& s) {
    std::map<std::string, double> pts;
    for (std::size_t m = 0; m < s.metrics.size(); ++m) {
        for (std::size_t i = 0; i < s.candidates.size(); ++i) {
            double p = 0;
            for (std::size_t j = 0; j < s.candidates.size(); ++j) {
                if (i == j) continue;
                const double a = s.values[i][m], b = s.values[j][m];
                const bool better = s.metrics[m].higher_is_better ? a > b : a < b;
                if (better) p += 1;
                else if (a == b) p += 0.5;
            }
            pts[s.candidates[i]] += p;
        }
    }
    return pts;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an adfg::Error");
    return ErrorKind::input;
}

}  // namespace

TEST_CASE("borda points match pairwise counting on random matrices with ties") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        ScoreMatrix s;
        const int n = std::uniform_int_distribution<int>(2, 7)(rng);
        const int k = std::uniform_int_distribution<int>(1, 5)(rng);
        for (int i = 0; i < n; ++i) s.candidates.push_back("c" + std::to_string(i));
        for (int m = 0; m < k; ++m) s.metrics.push_back({"m" + std::to_string(m), (rng() & 1) == 0});
        for (int i = 0; i < n; ++i) {
            std::vector<double> row;
            for (int m = 0; m < k; ++m) row.push_back(double(std::uniform_int_distribution<int>(0, 3)(rng)));
            s.values.push_back(row);
        }
        const RankTable t = borda_rank(s);
        const auto want = pairwise_points(s);
        REQUIRE(t.entries.size() == std::size_t(n));
        for (std::size_t r = 0; r < t.entries.size(); ++r) {
            const RankEntry& e = t.entries[r];
            CHECK(e.points == doctest::Approx(want.at(e.candidate)));
            CHECK(e.rank == int(r) + 1);
            if (r > 0) {
                const RankEntry& p = t.entries[r - 1];
                CHECK((p.points > e.points || (p.points == e.points && p.candidate < e.candidate)));
            }
        }
    }
}

TEST_CASE("published score table for arxiv ranks lokr first") {
    const ScoreMatrix s = parse_score_csv(read_text_file(kFixtures / "arxiv.csv"));
    const RankTable t = borda_rank(s);
    const std::vector<std::pair<std::string, int>> want{{"adalora", 4}, {"ia3", 6}, {"loha", 2},
                                                        {"lokr", 1},    {"lora", 3}, {"oft", 5}};
    for (const auto& [c, r] : want) CHECK(t.rank_of(c) == r);
    // second on rouge1 and bertscore, first elsewhere: 4 + 5 + 5 + 4 + 5 + 5
    CHECK(t.at("lokr").points == doctest::Approx(28.0));
}

TEST_CASE("equal totals are ordered by id and noted") {
    ScoreMatrix s;
    s.candidates = {"b", "a"};
    s.metrics = {{"x", true}, {"y", true}};
    s.values = {{1.0, 0.0}, {0.0, 1.0}};
    const RankTable t = borda_rank(s);
    CHECK(t.entries[0].candidate == "a");
    CHECK(t.entries[1].rank == 2);
    CHECK_FALSE(t.tie_notes.empty());
}

TEST_CASE("lower-is-better columns invert the order") {
    ScoreMatrix s;
    s.candidates = {"a", "b", "c"};
    s.metrics = {{"perplexity", false}};
    s.values = {{3.0}, {1.0}, {2.0}};
    const RankTable t = borda_rank(s);
    CHECK(t.entries[0].candidate == "b");
    CHECK(t.entries[2].candidate == "a");
}

TEST_CASE("score and rank csv round-trip") {
    const ScoreMatrix s = parse_score_csv("# comment\ncandidate,rouge1+,perplexity-\nx,0.5,12\ny,0.25,9.5\n");
    CHECK(s.metrics[1] == MetricColumn{"perplexity", false});
    CHECK(parse_score_csv(score_csv(s)) == s);
    const RankTable t = borda_rank(s);
    const RankTable back = parse_rank_csv(rank_csv(t));
    CHECK(back.entries == t.entries);
    CHECK(s.select_metrics({"perplexity"}).metrics.size() == 1);
}

TEST_CASE("malformed score matrices are rejected") {
    CHECK(kind_of([] { (void)parse_score_csv("candidate,a+\nx,1\nx,2\n"); }) == ErrorKind::input);
    CHECK(kind_of([] { (void)parse_score_csv("candidate,a+\nx,one\ny,1\n"); }) == ErrorKind::parse);
    CHECK(kind_of([] { (void)parse_score_csv("candidate,a+\nx,nan\ny,1\n"); }) == ErrorKind::input);
    ScoreMatrix ragged;
    ragged.candidates = {"a", "b"};
    ragged.metrics = {{"m", true}};
    ragged.values = {{1.0}, {}};
    CHECK(kind_of([&] { ragged.validate(); }) == ErrorKind::input);
}

TEST_CASE("top-k clamps with a warning") {
    ScoreMatrix s;
    s.candidates = {"a", "b", "c"};
    s.metrics = {{"m", true}};
    s.values = {{1.0}, {3.0}, {2.0}};
    const RankTable t = borda_rank(s);
    std::string warning;
    CHECK(top_k(t, 2, &warning) == std::vector<std::string>{"b", "c"});
    CHECK(warning.empty());
    CHECK(top_k(t, 5, &warning).size() == 3);
    CHECK_FALSE(warning.empty());
}
