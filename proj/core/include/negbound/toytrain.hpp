#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "negbound/embedding.hpp"
#include "negbound/matrix.hpp"

namespace negbound {

/// Synthetic-data + encoder + SGD settings for the desk-scale pipeline.
struct TrainConfig {
    int n_classes = 10;
    std::int64_t samples_per_class = 500;
    std::int64_t input_dim = 16;
    std::int64_t hidden_dim = 32;  // 0 = linear encoder
    std::int64_t embed_dim = 16;
    double cluster_separation = 4.0;
    double cluster_sigma = 1.0;
    AugmentationSpec augmentation{AugmentationKind::gaussian_noise, 0.1, 0.0, false};
    std::int64_t k_negatives = 31;
    double temperature = 0.5;
    int epochs = 30;
    std::int64_t batch_pairs_per_step = 64;
    double learning_rate = 0.5;
    std::uint64_t seed = 1;

    void validate() const;
};

/// JSON round trip; unknown keys are errors, missing keys keep defaults.
TrainConfig train_config_from_json(const std::string& json_text);
std::string train_config_to_json(const TrainConfig& config);

/// Raw inputs with latent labels and a stratified 90/10 split.
struct RawDataset {
    Matrix inputs;  // N x input_dim
    std::vector<int> labels;
    std::vector<std::int64_t> train_rows;
    std::vector<std::int64_t> val_rows;
    int n_classes = 0;
};

/// Gaussian class-conditional clusters: centers at separation * e_c along
/// orthonormal input directions, isotropic sigma.  Requires
/// input_dim >= n_classes.  Deterministic per seed.
RawDataset generate_synthetic(const TrainConfig& config, CounterRng rng);

/// Linear (or one-hidden-layer ReLU) encoder followed by L2 normalization.
/// Weights are double precision; exported embeddings are float.
struct EncoderWeights {
    std::int64_t input_dim = 0;
    std::int64_t hidden_dim = 0;  // 0 = linear
    std::int64_t embed_dim = 0;
    std::vector<double> w1;  // (hidden|embed) x input, row-major
    std::vector<double> w2;  // embed x hidden, empty when linear

    std::vector<float> encode(std::span<const float> x) const;
};

struct EpochLoss {
    double value = 0.0;
    double std_error = 0.0;
};

struct TrainResult {
    EncoderWeights encoder;
    std::vector<EpochLoss> loss_trace;  // one entry per epoch
    EmbeddingSet train_embeddings;      // normalized encoder outputs, train split
    EmbeddingSet val_embeddings;        // validation split
    double mean_acc = 0.0;
    double probe_acc = 0.0;
};

/// Minimize the empirical InfoNCE by plain SGD over independently sampled
/// (anchor, positive, K negatives) tuples, gradients derived analytically
/// through the normalization.  Epoch losses above 10 ln(K+1) abort with the
/// trace.  evaluate_classifiers is not called; see below.
TrainResult train_encoder(const TrainConfig& config, const RawDataset& data, CounterRng rng);

/// Loss and gradient of the summed InfoNCE over fixed, pre-augmented tuples;
/// exposed for the finite-difference gradient check.
struct TupleBatch {
    Matrix anchors;    // P x input_dim
    Matrix positives;  // P x input_dim
    Matrix negatives;  // (P*K) x input_dim, row j*K+k belongs to tuple j
    std::int64_t k = 0;
};

double tuple_batch_loss(const EncoderWeights& encoder, const TupleBatch& batch,
                        double temperature, EncoderWeights* gradient);

struct ClassifierEval {
    double mean_acc = 0.0;
    double probe_acc = 0.0;
};

struct EvalClassifierOptions {
    AugmentationSpec augmentation{};  // embedding-space, identity by default
    int m_augmentations = 10;
    int probe_epochs = 200;
    double probe_learning_rate = 0.5;
};

/// Mean classifier from training-split class means (M augmentations) and a
/// linear probe trained on the training split, both scored on validation.
ClassifierEval evaluate_classifiers(const EmbeddingSet& train, const EmbeddingSet& val,
                                    const EvalClassifierOptions& opts, CounterRng rng);

/// Loss trace CSV: epoch,loss,stderr.
std::string loss_trace_csv(const std::vector<EpochLoss>& trace);

}  // namespace negbound
