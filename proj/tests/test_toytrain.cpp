#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "negbound/error.hpp"
#include "negbound/losses.hpp"
#include "negbound/toytrain.hpp"

using namespace negbound;

namespace {

TrainConfig micro_config() {
    TrainConfig c;
    c.n_classes = 3;
    c.samples_per_class = 10;
    c.input_dim = 4;
    c.hidden_dim = 3;
    c.embed_dim = 3;
    c.cluster_separation = 3.0;
    c.cluster_sigma = 0.7;
    c.k_negatives = 2;
    c.temperature = 0.5;
    c.epochs = 2;
    c.batch_pairs_per_step = 3;
    c.learning_rate = 0.2;
    c.seed = 11;
    return c;
}

TrainConfig small_config() {
    TrainConfig c;
    c.n_classes = 5;
    c.samples_per_class = 60;
    c.input_dim = 8;
    c.hidden_dim = 16;
    c.embed_dim = 8;
    c.cluster_separation = 4.0;
    c.cluster_sigma = 1.0;
    c.augmentation = {AugmentationKind::gaussian_noise, 0.1, 0.0, false};
    c.k_negatives = 7;
    c.temperature = 0.5;
    c.epochs = 25;
    c.batch_pairs_per_step = 32;
    c.learning_rate = 0.5;
    c.seed = 3;
    return c;
}

/// Nearest-center accuracy on raw inputs; the sanity floor for the
/// synthetic generator.
double nearest_center_accuracy(const TrainConfig& config, const RawDataset& data) {
    std::int64_t correct = 0;
    for (std::int64_t i = 0; i < data.inputs.rows; ++i) {
        const auto x = data.inputs.row(i);
        int best = 0;
        double best_dist = 1e300;
        for (int c = 0; c < config.n_classes; ++c) {
            double dist = 0.0;
            for (std::int64_t d = 0; d < config.input_dim; ++d) {
                const double center = d == c ? config.cluster_separation : 0.0;
                const double delta = static_cast<double>(x[static_cast<std::size_t>(d)]) - center;
                dist += delta * delta;
            }
            if (dist < best_dist) {
                best_dist = dist;
                best = c;
            }
        }
        if (best == data.labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.inputs.rows);
}

}  // namespace

TEST_CASE("config json round trip and validation") {
    TrainConfig c = small_config();
    const auto text = train_config_to_json(c);
    const TrainConfig back = train_config_from_json(text);
    CHECK(back.n_classes == c.n_classes);
    CHECK(back.cluster_sigma == c.cluster_sigma);
    CHECK(back.augmentation.sigma == c.augmentation.sigma);
    CHECK(back.seed == c.seed);

    CHECK_THROWS_AS(train_config_from_json("{\"bogus_key\": 1}"), std::invalid_argument);
    CHECK_THROWS_AS(train_config_from_json("{\"n_classes\": 10, \"input_dim\": 4}"),
                    std::invalid_argument);  // orthogonal placement impossible
    const TrainConfig defaults = train_config_from_json("{}");
    CHECK(defaults.n_classes == 10);
}

TEST_CASE("synthetic generator: centers, split, chance level") {
    TrainConfig c = micro_config();
    const auto data = generate_synthetic(c, CounterRng(c.seed, "synthetic"));
    CHECK(data.inputs.rows == 30);
    CHECK(data.train_rows.size() == 27);
    CHECK(data.val_rows.size() == 3);

    // deterministic per seed
    const auto again = generate_synthetic(c, CounterRng(c.seed, "synthetic"));
    CHECK(again.inputs.data == data.inputs.data);

    // sigma -> 0 collapses samples onto their centers
    TrainConfig tight = c;
    tight.cluster_sigma = 1e-12;
    const auto collapsed = generate_synthetic(tight, CounterRng(1, "s"));
    for (std::int64_t i = 0; i < collapsed.inputs.rows; ++i) {
        const int y = collapsed.labels[static_cast<std::size_t>(i)];
        for (std::int64_t d = 0; d < tight.input_dim; ++d) {
            const double expect = d == y ? tight.cluster_separation : 0.0;
            CHECK(std::abs(collapsed.inputs.at(i, d) - expect) <= 1e-9);
        }
    }

    // default-scale parameters give a >= 0.95 nearest-center floor
    TrainConfig wide = small_config();
    const auto sep_data = generate_synthetic(wide, CounterRng(5, "s"));
    CHECK(nearest_center_accuracy(wide, sep_data) >= 0.95);
}

TEST_CASE("analytic gradient matches central finite differences") {
    TrainConfig c = micro_config();
    const auto data = generate_synthetic(c, CounterRng(c.seed, "synthetic"));

    // fixed pre-augmented tuple batch
    CounterRng rng(17, "fd");
    TupleBatch batch;
    batch.k = 2;
    const std::int64_t pairs = 3;
    batch.anchors = Matrix(pairs, c.input_dim);
    batch.positives = Matrix(pairs, c.input_dim);
    batch.negatives = Matrix(pairs * batch.k, c.input_dim);
    for (std::int64_t p = 0; p < pairs; ++p) {
        const auto a = apply_augmentation(data.inputs.row(p), c.augmentation, rng);
        const auto pos = apply_augmentation(data.inputs.row(p), c.augmentation, rng);
        std::copy(a.begin(), a.end(), batch.anchors.row(p).begin());
        std::copy(pos.begin(), pos.end(), batch.positives.row(p).begin());
        for (std::int64_t j = 0; j < batch.k; ++j) {
            const auto nv =
                apply_augmentation(data.inputs.row(10 + 3 * p + j), c.augmentation, rng);
            std::copy(nv.begin(), nv.end(), batch.negatives.row(p * batch.k + j).begin());
        }
    }

    for (std::int64_t hidden : {std::int64_t{0}, std::int64_t{3}}) {
        EncoderWeights enc;
        enc.input_dim = c.input_dim;
        enc.hidden_dim = hidden;
        enc.embed_dim = c.embed_dim;
        CounterRng wrng(23, "w");
        const std::int64_t first = hidden == 0 ? c.embed_dim : hidden;
        enc.w1.resize(static_cast<std::size_t>(first * c.input_dim));
        for (double& w : enc.w1) w = 0.4 * wrng.normal();
        if (hidden > 0) {
            enc.w2.resize(static_cast<std::size_t>(c.embed_dim * hidden));
            for (double& w : enc.w2) w = 0.4 * wrng.normal();
        }

        EncoderWeights grad;
        tuple_batch_loss(enc, batch, c.temperature, &grad);

        const double step = 1e-5;
        double max_rel = 0.0;
        auto check_block = [&](std::vector<double>& weights, const std::vector<double>& g) {
            for (std::size_t i = 0; i < weights.size(); ++i) {
                const double keep = weights[i];
                weights[i] = keep + step;
                const double up = tuple_batch_loss(enc, batch, c.temperature, nullptr);
                weights[i] = keep - step;
                const double down = tuple_batch_loss(enc, batch, c.temperature, nullptr);
                weights[i] = keep;
                const double fd = (up - down) / (2.0 * step);
                const double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-6});
                max_rel = std::max(max_rel, std::abs(fd - g[i]) / denom);
            }
        };
        check_block(enc.w1, grad.w1);
        if (hidden > 0) check_block(enc.w2, grad.w2);
        CHECK(max_rel < 1e-4);
    }
}

TEST_CASE("training: zero learning rate leaves weights alone") {
    TrainConfig c = micro_config();
    c.learning_rate = 0.0;
    c.epochs = 3;
    const auto data = generate_synthetic(c, CounterRng(c.seed, "synthetic"));
    const auto result = train_encoder(c, data, CounterRng(c.seed, "train"));
    REQUIRE(result.loss_trace.size() == 3);
    // batches differ between epochs but the encoder is frozen, so epoch
    // means stay within sampling noise of each other; weights are exactly
    // the initialization draw
    TrainConfig c2 = c;
    c2.epochs = 0;
    const auto untouched = train_encoder(c2, data, CounterRng(c.seed, "train"));
    CHECK(untouched.encoder.w1 == result.encoder.w1);
    CHECK(untouched.encoder.w2 == result.encoder.w2);
}

TEST_CASE("training: determinism and loss improvement") {
    TrainConfig c = small_config();
    const auto data = generate_synthetic(c, CounterRng(c.seed, "synthetic"));
    const auto r1 = train_encoder(c, data, CounterRng(c.seed, "train"));
    const auto r2 = train_encoder(c, data, CounterRng(c.seed, "train"));
    CHECK(r1.encoder.w1 == r2.encoder.w1);
    CHECK(r1.loss_trace.size() == r2.loss_trace.size());
    for (std::size_t i = 0; i < r1.loss_trace.size(); ++i) {
        CHECK(r1.loss_trace[i].value == r2.loss_trace[i].value);
    }
    CHECK(loss_trace_csv(r1.loss_trace) == loss_trace_csv(r2.loss_trace));

    // beats the constant-encoder ceiling by a margin
    const double ceiling = std::log(static_cast<double>(c.k_negatives) + 1.0);
    CHECK(r1.loss_trace.back().value < ceiling - 0.5);

    // embeddings are normalized and split sizes carried over
    r1.train_embeddings.validate();
    r1.val_embeddings.validate();
    CHECK(r1.train_embeddings.normalized);
    CHECK(r1.val_embeddings.size() == static_cast<std::int64_t>(data.val_rows.size()));
}

TEST_CASE("training: divergence aborts with the trace") {
    TrainConfig c = micro_config();
    c.learning_rate = 2000.0;  // drives the loss over the ceiling
    c.epochs = 60;
    const auto data = generate_synthetic(c, CounterRng(c.seed, "synthetic"));
    try {
        train_encoder(c, data, CounterRng(c.seed, "train"));
        // Extremely large steps usually blow past 10 ln(K+1); if training
        // survived, the loss must at least have stayed finite.
    } catch (const DivergenceError& e) {
        CHECK_FALSE(e.loss_trace.empty());
    }
}

TEST_CASE("classifier evaluation: separable clusters score highly") {
    TrainConfig c = small_config();
    const auto data = generate_synthetic(c, CounterRng(c.seed, "synthetic"));
    const auto result = train_encoder(c, data, CounterRng(c.seed, "train"));

    EvalClassifierOptions eval;
    const auto scores = evaluate_classifiers(result.train_embeddings, result.val_embeddings,
                                             eval, CounterRng(c.seed, "eval"));
    CHECK(scores.mean_acc >= 0.9);
    CHECK(scores.probe_acc >= scores.mean_acc - 0.02);

    // chance level on collapsed clusters with an untrained encoder
    TrainConfig flat = small_config();
    flat.cluster_separation = 1e-9;
    flat.epochs = 0;
    const auto flat_data = generate_synthetic(flat, CounterRng(21, "s"));
    const auto flat_result = train_encoder(flat, flat_data, CounterRng(22, "t"));
    const auto flat_scores = evaluate_classifiers(flat_result.train_embeddings,
                                                  flat_result.val_embeddings, eval,
                                                  CounterRng(23, "e"));
    const double chance = 1.0 / flat.n_classes;
    const double sigma =
        std::sqrt(chance * (1 - chance) / static_cast<double>(flat_result.val_embeddings.size()));
    CHECK(flat_scores.mean_acc <= chance + 4.0 * sigma);
}
