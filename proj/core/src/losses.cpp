#include "negbound/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "negbound/error.hpp"
#include "negbound/parallel.hpp"

namespace negbound {

double info_nce_logits(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("info_nce: empty candidate set");
    const double m = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double l : logits) denom += std::exp(l - m);
    return -(logits[0] - m) + std::log(denom);
}

double info_nce(std::span<const float> anchor, const Matrix& z_set, double temperature) {
    if (temperature <= 0.0) throw std::invalid_argument("info_nce: temperature must be > 0");
    if (z_set.rows < 1) throw std::invalid_argument("info_nce: empty candidate set");
    if (z_set.cols != static_cast<std::int64_t>(anchor.size())) {
        throw std::invalid_argument("info_nce: dimension mismatch");
    }
    std::vector<double> logits(static_cast<std::size_t>(z_set.rows));
    for (std::int64_t i = 0; i < z_set.rows; ++i) {
        logits[static_cast<std::size_t>(i)] = dot(anchor, z_set.row(i)) / temperature;
    }
    return info_nce_logits(logits);
}

double sub_class_loss(std::span<const float> z, int anchor_class, std::span<const int> class_bag,
                      const Matrix& class_means, double temperature) {
    if (temperature <= 0.0) throw std::invalid_argument("sub_class_loss: temperature must be > 0");
    if (class_bag.empty()) throw std::invalid_argument("sub_class_loss: empty class bag");
    std::vector<double> logits;
    logits.reserve(class_bag.size());
    double anchor_logit = 0.0;
    bool anchor_seen = false;
    for (int c : class_bag) {
        const double l = dot(z, class_means.row(c)) / temperature;
        if (c == anchor_class && !anchor_seen) {
            anchor_seen = true;
            anchor_logit = l;
        }
        logits.push_back(l);
    }
    if (!anchor_seen) {
        throw std::invalid_argument("sub_class_loss: anchor class missing from the bag");
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double l : logits) denom += std::exp(l - m);
    return -(anchor_logit - m) + std::log(denom);
}

LossEstimate estimate_l_info(const EmbeddingSet& set, const AugmentationSpec& spec,
                             std::int64_t k, double temperature, std::int64_t n_batches,
                             CounterRng rng, int threads) {
    if (n_batches < 1) throw std::invalid_argument("estimate_l_info: n_batches must be >= 1");
    const ClassDistribution rho = empirical_distribution(set);
    const ClassRowIndex index = build_class_index(set);

    std::vector<double> values(static_cast<std::size_t>(n_batches));
    parallel_for(n_batches, threads, [&](std::int64_t i) {
        CounterRng batch_rng = rng.fork("l_info_batch", static_cast<std::uint64_t>(i));
        const ContrastiveBatch b = sample_batch(set, index, rho, spec, k, batch_rng);
        std::vector<double> logits(static_cast<std::size_t>(k) + 1);
        logits[0] = dot(b.anchor, b.positive) / temperature;
        for (std::int64_t j = 0; j < k; ++j) {
            logits[static_cast<std::size_t>(j) + 1] =
                dot(std::span<const float>(b.anchor), b.negatives.row(j)) / temperature;
        }
        values[static_cast<std::size_t>(i)] = info_nce_logits(logits);
    });

    const MeanStderr ms = mean_stderr(values);
    return {ms.mean, ms.std_error, ms.n, temperature};
}

LossEstimate mean_classifier_loss(const EmbeddingSet& set, const MeanRepresentations& means,
                                  double temperature, std::span<const int> class_subset) {
    if (temperature <= 0.0) {
        throw std::invalid_argument("mean_classifier_loss: temperature must be > 0");
    }
    std::vector<int> subset(class_subset.begin(), class_subset.end());
    if (subset.empty()) {
        subset.resize(static_cast<std::size_t>(set.n_classes));
        for (int c = 0; c < set.n_classes; ++c) subset[static_cast<std::size_t>(c)] = c;
    }
    std::vector<bool> in_subset(static_cast<std::size_t>(set.n_classes), false);
    for (int c : subset) in_subset[static_cast<std::size_t>(c)] = true;

    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(set.size()));
    for (std::int64_t i = 0; i < set.size(); ++i) {
        const int y = set.labels[static_cast<std::size_t>(i)];
        if (!in_subset[static_cast<std::size_t>(y)]) continue;
        values.push_back(
            sub_class_loss(set.features.row(i), y, subset, means.class_means, temperature));
    }
    if (values.empty()) {
        throw std::invalid_argument("mean_classifier_loss: no sample has a label in the subset");
    }
    const MeanStderr ms = mean_stderr(values);
    return {ms.mean, ms.std_error, ms.n, temperature};
}

LossEstimate gap_term(const EmbeddingSet& set, const MeanRepresentations& means,
                      double temperature) {
    if (!means.per_sample_means.has_value()) {
        throw std::invalid_argument("gap_term: MeanRepresentations lacks per-sample means");
    }
    if (temperature <= 0.0) throw std::invalid_argument("gap_term: temperature must be > 0");
    const Matrix& mu_x = *means.per_sample_means;
    std::vector<double> values(static_cast<std::size_t>(set.size()));
    for (std::int64_t i = 0; i < set.size(); ++i) {
        const int y = set.labels[static_cast<std::size_t>(i)];
        const auto mx = mu_x.row(i);
        const auto mc = means.class_means.row(y);
        values[static_cast<std::size_t>(i)] = (dot(mx, mc) - dot(mx, mx)) / temperature;
    }
    const MeanStderr ms = mean_stderr(values);
    return {ms.mean, ms.std_error, ms.n, temperature};
}

LossEstimate gap_term(const EmbeddingSet& set, const AugmentationSpec& spec, int m_augmentations,
                      CounterRng rng, double temperature) {
    const MeanRepresentations means = compute_class_means(set, spec, m_augmentations, rng);
    return gap_term(set, means, temperature);
}

namespace {

/// Full-batch cross-entropy and gradient for logits W z + b.
double probe_loss_and_grad(const EmbeddingSet& set, const Matrix& w,
                           const std::vector<double>& b, std::vector<double>* grad_w,
                           std::vector<double>* grad_b) {
    const std::int64_t n = set.size();
    const std::int64_t h = set.dim();
    const int c = set.n_classes;
    if (grad_w) std::fill(grad_w->begin(), grad_w->end(), 0.0);
    if (grad_b) std::fill(grad_b->begin(), grad_b->end(), 0.0);

    std::vector<double> logits(static_cast<std::size_t>(c));
    KahanSum loss;
    for (std::int64_t i = 0; i < n; ++i) {
        const auto z = set.features.row(i);
        for (int j = 0; j < c; ++j) {
            logits[static_cast<std::size_t>(j)] = dot(w.row(j), z) + b[static_cast<std::size_t>(j)];
        }
        const int y = set.labels[static_cast<std::size_t>(i)];
        const double m = *std::max_element(logits.begin(), logits.end());
        double denom = 0.0;
        for (double l : logits) denom += std::exp(l - m);
        loss.add(-(logits[static_cast<std::size_t>(y)] - m) + std::log(denom));
        if (grad_w) {
            for (int j = 0; j < c; ++j) {
                const double p = std::exp(logits[static_cast<std::size_t>(j)] - m) / denom;
                const double g = p - (j == y ? 1.0 : 0.0);
                (*grad_b)[static_cast<std::size_t>(j)] += g;
                double* gw = grad_w->data() + static_cast<std::size_t>(j) * h;
                for (std::int64_t d = 0; d < h; ++d) {
                    gw[d] += g * static_cast<double>(z[static_cast<std::size_t>(d)]);
                }
            }
        }
    }
    return loss.value() / static_cast<double>(n);
}

}  // namespace

ProbeResult train_linear_probe(const EmbeddingSet& set, const ProbeOptions& opts) {
    const std::int64_t h = set.dim();
    const int c = set.n_classes;
    for (int j = 0; j < c; ++j) {
        if (set.class_counts[static_cast<std::size_t>(j)] == 0) {
            std::ostringstream os;
            os << "train_linear_probe: class " << j << " has no samples";
            throw std::invalid_argument(os.str());
        }
    }

    Matrix w(c, h);
    if (opts.init_from_means) {
        for (int j = 0; j < c; ++j) {
            const auto mu = opts.init_from_means->class_means.row(j);
            std::copy(mu.begin(), mu.end(), w.row(j).begin());
        }
    }
    std::vector<double> b(static_cast<std::size_t>(c), 0.0);

    const std::size_t w_size = static_cast<std::size_t>(c) * static_cast<std::size_t>(h);
    std::vector<double> grad_w(w_size), grad_b(static_cast<std::size_t>(c));

    ProbeResult result;
    double lr = opts.learning_rate;
    double best_loss = probe_loss_and_grad(set, w, b, nullptr, nullptr);
    Matrix best_w = w;
    std::vector<double> best_b = b;
    result.loss_trace.push_back(best_loss);

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        const double loss = probe_loss_and_grad(set, w, b, &grad_w, &grad_b);
        if (!std::isfinite(loss)) {
            std::ostringstream os;
            os << "train_linear_probe: non-finite loss at epoch " << epoch;
            throw NumericError(os.str());
        }
        const double scale = lr / static_cast<double>(set.size());
        for (std::size_t i = 0; i < w_size; ++i) {
            w.data[i] = static_cast<float>(static_cast<double>(w.data[i]) - scale * grad_w[i]);
        }
        for (int j = 0; j < c; ++j) {
            b[static_cast<std::size_t>(j)] -= scale * grad_b[static_cast<std::size_t>(j)];
        }
        const double new_loss = probe_loss_and_grad(set, w, b, nullptr, nullptr);
        result.loss_trace.push_back(new_loss);
        if (new_loss < best_loss) {
            best_loss = new_loss;
            best_w = w;
            best_b = b;
        } else {
            // Step overshot; retreat to the best point and shrink the rate.
            w = best_w;
            b = best_b;
            lr *= 0.5;
            if (lr < 1e-12) break;
        }
    }

    result.weights = std::move(best_w);
    result.bias = std::move(best_b);
    result.final_loss = {best_loss, 0.0, set.size(), 1.0};
    ProbeResult tmp;
    tmp.weights = result.weights;
    tmp.bias = result.bias;
    result.train_accuracy = probe_accuracy(tmp, set);
    return result;
}

double probe_accuracy(const ProbeResult& probe, const EmbeddingSet& set) {
    std::int64_t correct = 0;
    for (std::int64_t i = 0; i < set.size(); ++i) {
        const auto z = set.features.row(i);
        int best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < set.n_classes; ++j) {
            const double s = dot(probe.weights.row(j), z) + probe.bias[static_cast<std::size_t>(j)];
            if (s > best_score) {  // ties keep the smaller class id
                best_score = s;
                best = j;
            }
        }
        if (best == set.labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(set.size());
}

double mean_classifier_accuracy(const MeanRepresentations& means, const EmbeddingSet& set) {
    std::int64_t correct = 0;
    for (std::int64_t i = 0; i < set.size(); ++i) {
        const auto z = set.features.row(i);
        int best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < set.n_classes; ++j) {
            const double s = dot(means.class_means.row(j), z);
            if (s > best_score) {
                best_score = s;
                best = j;
            }
        }
        if (best == set.labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(set.size());
}

}  // namespace negbound
