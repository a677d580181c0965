#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "negbound/embedding.hpp"
#include "negbound/matrix.hpp"

namespace negbound {

/// A loss value with Monte-Carlo standard error (0 for closed-form paths).
struct LossEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
    double temperature = 1.0;
};

/// InfoNCE over one anchor and an ordered candidate set with the positive
/// first: -ln[ exp(z.z+/t) / sum_k exp(z.z_k/t) ], max-shifted.
/// Non-negative; equals ln|z_set| when every similarity ties.
double info_nce(std::span<const float> anchor, const Matrix& z_set, double temperature);

/// Same loss on an explicit logits vector (positive first).
double info_nce_logits(std::span<const double> logits);

/// Mean-classifier sub-class loss for one sample:
/// -ln[ exp(z.mu_c/t) / sum_{j in class_bag} exp(z.mu_j/t) ].
/// The bag may contain duplicates; with Col+1 copies of the anchor class the
/// value is exactly ln(Col+1).
double sub_class_loss(std::span<const float> z, int anchor_class, std::span<const int> class_bag,
                      const Matrix& class_means, double temperature);

/// Monte-Carlo estimate of the expected self-supervised loss over
/// `n_batches` sampled (z, Z) tuples.
LossEstimate estimate_l_info(const EmbeddingSet& set, const AugmentationSpec& spec,
                             std::int64_t k, double temperature, std::int64_t n_batches,
                             CounterRng rng, int threads = 0);

/// Average mean-classifier cross-entropy over samples whose label lies in
/// `class_subset` (all classes when empty).  Softmax runs over the subset.
LossEstimate mean_classifier_loss(const EmbeddingSet& set, const MeanRepresentations& means,
                                  double temperature = 1.0,
                                  std::span<const int> class_subset = {});

/// Gap term d(f) = (1/t) * mean_i mu(x_i) . (mu_{y_i} - mu(x_i)), computed
/// from precomputed per-sample and class means.
LossEstimate gap_term(const EmbeddingSet& set, const MeanRepresentations& means,
                      double temperature);

/// Convenience overload that computes the means first.
LossEstimate gap_term(const EmbeddingSet& set, const AugmentationSpec& spec, int m_augmentations,
                      CounterRng rng, double temperature);

/// Multinomial logistic regression on frozen features.
struct ProbeResult {
    Matrix weights;             // |C| x h
    std::vector<double> bias;   // |C|
    LossEstimate final_loss;    // training cross-entropy at the returned weights
    double train_accuracy = 0.0;
    std::vector<double> loss_trace;  // per-epoch full-batch loss
};

struct ProbeOptions {
    int epochs = 200;
    double learning_rate = 0.5;
    const MeanRepresentations* init_from_means = nullptr;  // W rows = mu_y, b = 0
};

/// Full-batch gradient descent on the supervised cross-entropy.  The step
/// size halves whenever a step fails to improve the loss, and the best
/// weights seen are returned, so with mean initialization the final loss
/// never exceeds the mean classifier's.  Argmax ties break toward the
/// smallest class id.
ProbeResult train_linear_probe(const EmbeddingSet& set, const ProbeOptions& opts = {});

/// Probe accuracy on a set (argmax of W z + b, ties toward smaller id).
double probe_accuracy(const ProbeResult& probe, const EmbeddingSet& set);

/// Mean-classifier accuracy on a set (argmax of z . mu_y, ties toward
/// smaller id).
double mean_classifier_accuracy(const MeanRepresentations& means, const EmbeddingSet& set);

}  // namespace negbound
