// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adfg/data/corpus.hpp"
#include "adfg/evalmetrics/evaluate.hpp"

namespace adfg::similarity {

using Documents = std::vector<std::string>;

/// Article texts of a corpus; the similarity metrics treat each as one document.
Documents documents(const data::Corpus& corpus);

/// 100 · |V_a ∩ V_b| / |V_a ∪ V_b| over metric-token type sets.
double vocab_overlap(const Documents& a, const Documents& b);

/// 100 · cosine of the aggregate TF-IDF vectors (raw term counts summed
/// over each side's documents) with idf(t) = ln((N + 1) / (df(t) + 1)) + 1
/// over the pooled N documents. A zero vector raises ErrorKind::input.
double tfidf_overlap(const Documents& a, const Documents& b);

/// D_KL(P_val ‖ P_train) in nats over unigram distributions with add-λ
/// smoothing on the union vocabulary.
double kl_divergence(const Documents& validation, const Documents& train, double lambda = 0.5);

/// Mean cosine over all pairs of up to `sample` seeded-sampled documents per side.
double contextual_overlap(const Documents& a, const Documents& b, const evalmetrics::TextEmbedder& embedder,
                          std::int32_t sample = 32, std::uint64_t seed = 0, std::int32_t threads = 0);

struct SimilarityConfig {
    double kl_lambda = 0.5;
    std::int32_t sample = 32;
    std::uint64_t seed = 0;
    std::int32_t threads = 0;
    /// Header line naming the normalization choices.
    std::string describe() const;
};

struct SimilarityReport {
    std::string holdout;
    std::string training;
    double vocab_overlap = 0.0;
    double tfidf_overlap = 0.0;
    double kl_divergence = 0.0;
    std::optional<double> contextual_overlap;
};

/// KL is taken with `holdout` as the validation side.
SimilarityReport compare(const data::Corpus& holdout, const data::Corpus& training,
                         const evalmetrics::TextEmbedder* embedder, const SimilarityConfig& config = {});

/// CSV with one row per (holdout, training corpus) pair and one column per metric.
std::string similarity_matrix(const std::vector<SimilarityReport>& rows);

}  // namespace adfg::similarity
