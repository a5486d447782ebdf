// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/similarity/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "adfg/common/error.hpp"
#include "adfg/common/text_io.hpp"
#include "adfg/evalmetrics/tokenize.hpp"

namespace adfg::similarity {

namespace {

using Counts = std::map<std::string, double>;

void require_docs(const Documents& d, const char* what) {
    ADFG_REQUIRE(!d.empty(), ErrorKind::input, std::string(what) + ": corpus is empty");
}

Counts term_counts(const Documents& docs) {
    Counts c;
    for (const std::string& d : docs) {
        for (std::string& t : evalmetrics::metric_tokens(d)) c[std::move(t)] += 1.0;
    }
    return c;
}

}  // namespace

Documents documents(const data::Corpus& corpus) {
    Documents out;
    for (const data::Example& e : corpus.examples()) out.push_back(e.article);
    return out;
}

double vocab_overlap(const Documents& a, const Documents& b) {
    require_docs(a, "vocab_overlap");
    require_docs(b, "vocab_overlap");
    std::set<std::string> va, vb;
    for (const auto& d : a) {
        for (auto& t : evalmetrics::metric_tokens(d)) va.insert(std::move(t));
    }
    for (const auto& d : b) {
        for (auto& t : evalmetrics::metric_tokens(d)) vb.insert(std::move(t));
    }
    std::size_t inter = 0;
    for (const auto& t : va) inter += vb.count(t);
    const std::size_t uni = va.size() + vb.size() - inter;
    return uni == 0 ? 0.0 : 100.0 * static_cast<double>(inter) / static_cast<double>(uni);
}

double tfidf_overlap(const Documents& a, const Documents& b) {
    require_docs(a, "tfidf_overlap");
    require_docs(b, "tfidf_overlap");
    std::map<std::string, double> df;
    std::vector<Counts> ta, tb;
    auto load = [&df](const Documents& docs, std::vector<Counts>& out) {
        for (const auto& d : docs) {
            Counts c = term_counts({d});
            for (const auto& [t, n] : c) df[t] += 1.0;
            out.push_back(std::move(c));
        }
    };
    load(a, ta);
    load(b, tb);
    const auto N = static_cast<double>(a.size() + b.size());
    auto aggregate = [&](const std::vector<Counts>& side) {
        Counts v;
        for (const Counts& c : side) {
            for (const auto& [t, n] : c) v[t] += n * (std::log((N + 1.0) / (df.at(t) + 1.0)) + 1.0);
        }
        return v;
    };
    const Counts va = aggregate(ta), vb = aggregate(tb);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [t, x] : va) {
        na += x * x;
        auto it = vb.find(t);
        if (it != vb.end()) dot += x * it->second;
    }
    for (const auto& [t, y] : vb) nb += y * y;
    ADFG_REQUIRE(na > 0.0 && nb > 0.0, ErrorKind::input, "tfidf_overlap: a corpus has no tokens");
    return 100.0 * dot / std::sqrt(na * nb);
}

double kl_divergence(const Documents& validation, const Documents& train, double lambda) {
    require_docs(validation, "kl_divergence");
    require_docs(train, "kl_divergence");
    ADFG_REQUIRE(lambda > 0.0, ErrorKind::config, "kl_divergence: smoothing must be positive");
    const Counts p = term_counts(validation), q = term_counts(train);
    std::set<std::string> vocab;
    for (const auto& [t, n] : p) vocab.insert(t);
    for (const auto& [t, n] : q) vocab.insert(t);
    ADFG_REQUIRE(!vocab.empty(), ErrorKind::input, "kl_divergence: both corpora are empty of tokens");
    double np = 0.0, nq = 0.0;
    for (const auto& [t, n] : p) np += n;
    for (const auto& [t, n] : q) nq += n;
    const auto V = static_cast<double>(vocab.size());
    double kl = 0.0;
    for (const std::string& t : vocab) {
        auto ip = p.find(t), iq = q.find(t);
        const double pt = ((ip == p.end() ? 0.0 : ip->second) + lambda) / (np + lambda * V);
        const double qt = ((iq == q.end() ? 0.0 : iq->second) + lambda) / (nq + lambda * V);
        kl += pt * std::log(pt / qt);
    }
    return std::max(0.0, kl);
}

double contextual_overlap(const Documents& a, const Documents& b, const evalmetrics::TextEmbedder& embedder,
                          std::int32_t sample, std::uint64_t seed, std::int32_t threads) {
    require_docs(a, "contextual_overlap");
    require_docs(b, "contextual_overlap");
    ADFG_REQUIRE(sample >= 1, ErrorKind::config, "contextual_overlap: sample must be at least 1");
    auto pick = [sample](const Documents& d, std::uint64_t s) {
        std::vector<std::size_t> idx(d.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::mt19937_64 rng(s);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(std::min(idx.size(), static_cast<std::size_t>(sample)));
        std::sort(idx.begin(), idx.end());
        return idx;
    };
    const auto ia = pick(a, seed * 2 + 1), ib = pick(b, seed * 2 + 2);
    std::vector<const std::string*> texts;
    for (std::size_t i : ia) texts.push_back(&a[i]);
    for (std::size_t i : ib) texts.push_back(&b[i]);
    std::vector<std::vector<double>> emb(texts.size());
    const std::int32_t n = evalmetrics::thread_count(threads, texts.size());
    std::vector<std::thread> pool;
    for (std::int32_t t = 0; t < n; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = static_cast<std::size_t>(t); i < texts.size(); i += static_cast<std::size_t>(n)) {
                emb[i] = embedder.embed(*texts[i]);
            }
        });
    }
    for (auto& th : pool) th.join();
    double total = 0.0;
    for (std::size_t i = 0; i < ia.size(); ++i) {
        for (std::size_t j = 0; j < ib.size(); ++j) total += evalmetrics::cosine(emb[i], emb[ia.size() + j]);
    }
    return total / static_cast<double>(ia.size() * ib.size());
}

std::string SimilarityConfig::describe() const {
    std::ostringstream s;
    s << "# vocab=jaccard tfidf=cosine(idf=ln((N+1)/(df+1))+1) kl=add-" << kl_lambda
      << " contextual=mean-pair-cosine(sample=" << sample << ",seed=" << seed << ")";
    return s.str();
}

SimilarityReport compare(const data::Corpus& holdout, const data::Corpus& training,
                         const evalmetrics::TextEmbedder* embedder, const SimilarityConfig& config) {
    const Documents h = documents(holdout), t = documents(training);
    SimilarityReport r;
    r.holdout = holdout.dataset();
    r.training = training.dataset();
    r.vocab_overlap = vocab_overlap(h, t);
    r.tfidf_overlap = tfidf_overlap(h, t);
    r.kl_divergence = kl_divergence(h, t, config.kl_lambda);
    if (embedder != nullptr) {
        r.contextual_overlap = contextual_overlap(h, t, *embedder, config.sample, config.seed, config.threads);
    }
    return r;
}

std::string similarity_matrix(const std::vector<SimilarityReport>& rows) {
    std::ostringstream s;
    s << "holdout,training,vocab_overlap,tfidf_overlap,kl_divergence,contextual_overlap\n";
    for (const SimilarityReport& r : rows) {
        s << r.holdout << ',' << r.training << ',' << fixed(r.vocab_overlap, 4) << ',' << fixed(r.tfidf_overlap, 4)
          << ',' << fixed(r.kl_divergence, 6) << ','
          << (r.contextual_overlap ? fixed(*r.contextual_overlap, 6) : std::string("-")) << '\n';
    }
    return s.str();
}

}  // namespace adfg::similarity
