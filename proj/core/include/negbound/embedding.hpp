#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "negbound/matrix.hpp"
#include "negbound/prob.hpp"
#include "negbound/rng.hpp"

namespace negbound {

/// N labeled feature vectors of dimension h with per-class counts.
/// Immutable by convention after construction; safe to share across threads.
struct EmbeddingSet {
    Matrix features;               // N x h
    std::vector<int> labels;       // values in [0, n_classes)
    int n_classes = 0;
    bool normalized = false;
    std::vector<std::int64_t> class_counts;  // size n_classes

    std::int64_t size() const { return features.rows; }
    std::int64_t dim() const { return features.cols; }

    /// Recompute class_counts from labels and check invariants.
    void validate() const;
};

EmbeddingSet make_embedding_set(Matrix features, std::vector<int> labels, int n_classes,
                                bool normalized);

/// Scale every row to unit L2 norm.  Rows of zero norm are an error
/// (reported with their index).
EmbeddingSet l2_normalize(const EmbeddingSet& set);

/// Empirical class distribution of a set (class_counts / N).
ClassDistribution empirical_distribution(const EmbeddingSet& set);

enum class AugmentationKind { gaussian_noise, coordinate_dropout, compose };

/// Stochastic vector -> vector map standing in for the paper-style data
/// augmentation family.  `compose` applies noise then dropout.
struct AugmentationSpec {
    AugmentationKind kind = AugmentationKind::gaussian_noise;
    double sigma = 0.0;       // noise scale, >= 0
    double drop_rate = 0.0;   // in [0, 1)
    bool renormalize = false;

    void validate() const;
    bool is_deterministic() const {
        const bool noise = kind != AugmentationKind::coordinate_dropout && sigma > 0.0;
        const bool drop = kind != AugmentationKind::gaussian_noise && drop_rate > 0.0;
        return !noise && !drop;
    }
};

/// One application of the augmentation with randomness from `rng`.
/// With renormalize set, an all-dropped vector resamples the dropout mask
/// (at most 100 retries).
std::vector<float> apply_augmentation(std::span<const float> x, const AugmentationSpec& spec,
                                      CounterRng& rng);

/// One sampled (z, Z) tuple: anchor, positive, K negatives, with the latent
/// class ids that produced them.
struct ContrastiveBatch {
    std::vector<float> anchor;
    std::vector<float> positive;
    Matrix negatives;  // K x h
    int anchor_class = 0;
    std::vector<int> negative_classes;
};

/// Per-class row lists, precomputed once for repeated sampling.
struct ClassRowIndex {
    std::vector<std::vector<std::int64_t>> rows;
};

ClassRowIndex build_class_index(const EmbeddingSet& set);

/// Draw one batch following the data generation process: anchor class and K
/// negative classes ~ rho, one sample per class draw, fresh augmentations
/// for anchor/positive and each negative.  rho defaults to the empirical
/// class distribution of `set`.
ContrastiveBatch sample_batch(const EmbeddingSet& set, const AugmentationSpec& spec,
                              std::int64_t k, CounterRng& rng,
                              const ClassDistribution* rho = nullptr);

/// Same, with the class index and distribution supplied by the caller.
ContrastiveBatch sample_batch(const EmbeddingSet& set, const ClassRowIndex& index,
                              const ClassDistribution& rho, const AugmentationSpec& spec,
                              std::int64_t k, CounterRng& rng);

/// Class means and per-sample augmentation means.
struct MeanRepresentations {
    Matrix class_means;                     // |C| x h
    std::optional<Matrix> per_sample_means;  // N x h
    int augmentations_per_sample = 0;
};

/// mu(x) = (1/M) sum_j aug_j(x) per sample, mu_c = mean of mu(x) over class
/// members.  Deterministic for a fixed rng stream.
MeanRepresentations compute_class_means(const EmbeddingSet& set, const AugmentationSpec& spec,
                                        int m_augmentations, CounterRng rng);

}  // namespace negbound
