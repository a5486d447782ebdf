// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"

#include "adfg/common/error.hpp"
#include "adfg/data/synth.hpp"
#include "adfg/evalmetrics/tokenize.hpp"
#include "adfg/similarity/similarity.hpp"

using namespace adfg;
using namespace adfg::similarity;

namespace {

/// Counts of a few fixed words, enough to tell texts apart.
class WordCountEmbedder final : public evalmetrics::TextEmbedder {
public:
    std::vector<double> embed(std::string_view text) const override {
        static const std::vector<std::string> words{"the", "cat", "dog", "sat", "ran"};
        std::vector<double> v(words.size(), 0.0);
        for (const std::string& t : evalmetrics::metric_tokens(text)) {
            for (std::size_t i = 0; i < words.size(); ++i)
                if (t == words[i]) v[i] += 1;
        }
        return v;
    }
};

data::Corpus corpus_of(const std::vector<std::string>& texts, data::Split split) {
    data::Corpus c(split, "c", "d");
    int i = 0;
    for (const std::string& t : texts) c.add({t, "s", std::to_string(i++), "c", "d"});
    return c;
}

}  // namespace

TEST_CASE("vocabulary overlap is the jaccard index of word types") {
    CHECK(vocab_overlap({"the cat sat"}, {"the dog sat"}) == doctest::Approx(50.0));
    CHECK(vocab_overlap({"The cat", "cat"}, {"the CAT"}) == doctest::Approx(100.0));
    CHECK(vocab_overlap({"a b"}, {"c d"}) == doctest::Approx(0.0));
}

TEST_CASE("tf-idf overlap by hand") {
    // the, sat appear in both documents: idf 1; cat, dog in one: idf ln(3/2) + 1
    const double w = std::log(1.5) + 1.0;
    CHECK(tfidf_overlap({"the cat sat"}, {"the dog sat"}) == doctest::Approx(100.0 * 2.0 / (2.0 + w * w)));
    // counts sum over a side's documents
    // cat is in all 3 documents: idf 1; dog in one: idf ln(4/2) + 1
    const double v = std::log(2.0) + 1.0;
    // a = {cat: 2}, b = {cat: 1, dog: v}
    CHECK(tfidf_overlap({"cat", "cat"}, {"cat dog"}) == doctest::Approx(100.0 / std::sqrt(1.0 + v * v)));
    try {
        (void)tfidf_overlap({"!!"}, {"cat"});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::input);
    }
}

TEST_CASE("kl divergence with add-half smoothing by hand") {
    // union {the, cat, sat, dog}; P = (1.5, 1.5, 1.5, 0.5)/5, Q = (1.5, 0.5, 1.5, 1.5)/5
    CHECK(kl_divergence({"the cat sat"}, {"the dog sat"}) == doctest::Approx(0.2 * std::log(3.0)));
    CHECK(kl_divergence({"the cat sat"}, {"the cat sat"}) == doctest::Approx(0.0));
    // λ = 1: P = (2, 2, 2, 1)/7, Q = (2, 1, 2, 2)/7
    CHECK(kl_divergence({"the cat sat"}, {"the dog sat"}, 1.0) ==
          doctest::Approx(2.0 / 7.0 * std::log(2.0) + 1.0 / 7.0 * std::log(0.5)));
}

TEST_CASE("a corpus compared with itself") {
    const data::Corpus c = corpus_of({"the cat sat", "the cat sat"}, data::Split::train);
    const data::Corpus h = corpus_of({"the cat sat", "the cat sat"}, data::Split::holdout);
    const WordCountEmbedder emb;
    const SimilarityReport r = compare(h, c, &emb);
    CHECK(r.vocab_overlap == doctest::Approx(100.0));
    CHECK(r.tfidf_overlap == doctest::Approx(100.0));
    CHECK(r.kl_divergence == doctest::Approx(0.0));
    REQUIRE(r.contextual_overlap.has_value());
    CHECK(*r.contextual_overlap == doctest::Approx(1.0));
    CHECK_FALSE(compare(h, c, nullptr).contextual_overlap.has_value());
}

TEST_CASE("contextual overlap averages every cross pair") {
    const WordCountEmbedder emb;
    // cos(cat, cat) = 1, cos(cat, dog) = 0 → mean over 2 × 1 pairs is 0.5
    CHECK(contextual_overlap({"cat", "dog"}, {"cat"}, emb) == doctest::Approx(0.5));
}

TEST_CASE("synthetic domains are closest to themselves") {
    data::SynthConfig cfg;
    cfg.train_size = 40;
    cfg.validation_size = 5;
    cfg.test_size = 5;
    cfg.holdout_size = 20;
    const auto domains = data::synth_domains(cfg);
    for (std::size_t h = 0; h < domains.size(); ++h) {
        const Documents held = documents(domains[h].holdout);
        const Documents same = documents(domains[h].train);
        for (std::size_t o = 0; o < domains.size(); ++o) {
            if (o == h) continue;
            CAPTURE(domains[h].name);
            CAPTURE(domains[o].name);
            const Documents other = documents(domains[o].train);
            CHECK(vocab_overlap(held, same) > vocab_overlap(held, other));
            CHECK(tfidf_overlap(held, same) > tfidf_overlap(held, other));
            CHECK(kl_divergence(held, same) < kl_divergence(held, other));
        }
    }
}

TEST_CASE("similarity matrix csv has one row per pair") {
    SimilarityReport a{"h", "t1", 50, 60, 0.1, 0.9};
    SimilarityReport b{"h", "t2", 40, 30, 0.2, std::nullopt};
    const std::string csv = similarity_matrix({a, b});
    CHECK(std::count(csv.begin(), csv.end(), '\n') >= 3);
    CHECK(csv.find("t2") != std::string::npos);
    CHECK(SimilarityConfig{}.describe().find("0.5") != std::string::npos);
}
