#include "negbound/toytrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "negbound/error.hpp"
#include "negbound/losses.hpp"
#include "negbound/parallel.hpp"

namespace negbound {

void TrainConfig::validate() const {
    if (n_classes < 1) throw std::invalid_argument("TrainConfig: n_classes must be >= 1");
    if (samples_per_class < 1) {
        throw std::invalid_argument("TrainConfig: samples_per_class must be >= 1");
    }
    if (input_dim < 1 || embed_dim < 1) {
        throw std::invalid_argument("TrainConfig: input_dim and embed_dim must be >= 1");
    }
    if (hidden_dim < 0) throw std::invalid_argument("TrainConfig: hidden_dim must be >= 0");
    if (input_dim < n_classes) {
        throw std::invalid_argument(
            "TrainConfig: input_dim must be >= n_classes for orthogonal cluster centers");
    }
    if (!(cluster_separation > 0.0) || !(cluster_sigma > 0.0)) {
        throw std::invalid_argument("TrainConfig: separation and sigma must be > 0");
    }
    if (k_negatives < 1) throw std::invalid_argument("TrainConfig: k_negatives must be >= 1");
    if (!(temperature > 0.0)) throw std::invalid_argument("TrainConfig: temperature must be > 0");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (batch_pairs_per_step < 1) {
        throw std::invalid_argument("TrainConfig: batch_pairs_per_step must be >= 1");
    }
    if (learning_rate < 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be >= 0");
    augmentation.validate();
}

namespace {

using nlohmann::json;

AugmentationKind kind_from_string(const std::string& s) {
    if (s == "gaussian_noise") return AugmentationKind::gaussian_noise;
    if (s == "coordinate_dropout") return AugmentationKind::coordinate_dropout;
    if (s == "compose") return AugmentationKind::compose;
    throw std::invalid_argument("unknown augmentation kind '" + s + "'");
}

std::string kind_to_string(AugmentationKind k) {
    switch (k) {
        case AugmentationKind::gaussian_noise: return "gaussian_noise";
        case AugmentationKind::coordinate_dropout: return "coordinate_dropout";
        case AugmentationKind::compose: return "compose";
    }
    return "gaussian_noise";
}

AugmentationSpec augmentation_from_json(const json& j) {
    AugmentationSpec spec;
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") spec.kind = kind_from_string(value.get<std::string>());
        else if (key == "sigma") spec.sigma = value.get<double>();
        else if (key == "drop_rate") spec.drop_rate = value.get<double>();
        else if (key == "renormalize") spec.renormalize = value.get<bool>();
        else throw std::invalid_argument("unknown augmentation key '" + key + "'");
    }
    spec.validate();
    return spec;
}

json augmentation_to_json(const AugmentationSpec& spec) {
    return {{"kind", kind_to_string(spec.kind)},
            {"sigma", spec.sigma},
            {"drop_rate", spec.drop_rate},
            {"renormalize", spec.renormalize}};
}

}  // namespace

TrainConfig train_config_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    TrainConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "n_classes") c.n_classes = value.get<int>();
        else if (key == "samples_per_class") c.samples_per_class = value.get<std::int64_t>();
        else if (key == "input_dim") c.input_dim = value.get<std::int64_t>();
        else if (key == "hidden_dim") c.hidden_dim = value.get<std::int64_t>();
        else if (key == "embed_dim") c.embed_dim = value.get<std::int64_t>();
        else if (key == "cluster_separation") c.cluster_separation = value.get<double>();
        else if (key == "cluster_sigma") c.cluster_sigma = value.get<double>();
        else if (key == "augmentation") c.augmentation = augmentation_from_json(value);
        else if (key == "k_negatives") c.k_negatives = value.get<std::int64_t>();
        else if (key == "temperature") c.temperature = value.get<double>();
        else if (key == "epochs") c.epochs = value.get<int>();
        else if (key == "batch_pairs_per_step") c.batch_pairs_per_step = value.get<std::int64_t>();
        else if (key == "learning_rate") c.learning_rate = value.get<double>();
        else if (key == "seed") c.seed = value.get<std::uint64_t>();
        else throw std::invalid_argument("unknown TrainConfig key '" + key + "'");
    }
    c.validate();
    return c;
}

std::string train_config_to_json(const TrainConfig& c) {
    json j = {{"n_classes", c.n_classes},
              {"samples_per_class", c.samples_per_class},
              {"input_dim", c.input_dim},
              {"hidden_dim", c.hidden_dim},
              {"embed_dim", c.embed_dim},
              {"cluster_separation", c.cluster_separation},
              {"cluster_sigma", c.cluster_sigma},
              {"augmentation", augmentation_to_json(c.augmentation)},
              {"k_negatives", c.k_negatives},
              {"temperature", c.temperature},
              {"epochs", c.epochs},
              {"batch_pairs_per_step", c.batch_pairs_per_step},
              {"learning_rate", c.learning_rate},
              {"seed", c.seed}};
    return j.dump(2);
}

RawDataset generate_synthetic(const TrainConfig& config, CounterRng rng) {
    config.validate();
    const std::int64_t n = static_cast<std::int64_t>(config.n_classes) * config.samples_per_class;
    RawDataset data;
    data.n_classes = config.n_classes;
    data.inputs = Matrix(n, config.input_dim);
    data.labels.resize(static_cast<std::size_t>(n));

    std::int64_t row = 0;
    for (int c = 0; c < config.n_classes; ++c) {
        CounterRng class_rng = rng.fork("synthetic_class", static_cast<std::uint64_t>(c));
        for (std::int64_t s = 0; s < config.samples_per_class; ++s, ++row) {
            data.labels[static_cast<std::size_t>(row)] = c;
            auto dst = data.inputs.row(row);
            for (std::int64_t d = 0; d < config.input_dim; ++d) {
                double v = config.cluster_sigma * class_rng.normal();
                if (d == c) v += config.cluster_separation;
                dst[static_cast<std::size_t>(d)] = static_cast<float>(v);
            }
        }
    }

    // Stratified 90/10 split: within each class block the leading rows train,
    // the trailing tenth validates.
    row = 0;
    for (int c = 0; c < config.n_classes; ++c) {
        const std::int64_t val_count = config.samples_per_class / 10;
        const std::int64_t train_count = config.samples_per_class - val_count;
        for (std::int64_t s = 0; s < config.samples_per_class; ++s, ++row) {
            (s < train_count ? data.train_rows : data.val_rows).push_back(row);
        }
    }
    return data;
}

std::vector<float> EncoderWeights::encode(std::span<const float> x) const {
    std::vector<double> u(static_cast<std::size_t>(embed_dim), 0.0);
    if (hidden_dim == 0) {
        for (std::int64_t i = 0; i < embed_dim; ++i) {
            const double* w = w1.data() + static_cast<std::size_t>(i * input_dim);
            double acc = 0.0;
            for (std::int64_t d = 0; d < input_dim; ++d) acc += w[d] * x[static_cast<std::size_t>(d)];
            u[static_cast<std::size_t>(i)] = acc;
        }
    } else {
        std::vector<double> h(static_cast<std::size_t>(hidden_dim));
        for (std::int64_t i = 0; i < hidden_dim; ++i) {
            const double* w = w1.data() + static_cast<std::size_t>(i * input_dim);
            double acc = 0.0;
            for (std::int64_t d = 0; d < input_dim; ++d) acc += w[d] * x[static_cast<std::size_t>(d)];
            h[static_cast<std::size_t>(i)] = acc > 0.0 ? acc : 0.0;
        }
        for (std::int64_t i = 0; i < embed_dim; ++i) {
            const double* w = w2.data() + static_cast<std::size_t>(i * hidden_dim);
            double acc = 0.0;
            for (std::int64_t d = 0; d < hidden_dim; ++d) acc += w[d] * h[static_cast<std::size_t>(d)];
            u[static_cast<std::size_t>(i)] = acc;
        }
    }
    double r = 0.0;
    for (double v : u) r += v * v;
    r = std::max(std::sqrt(r), 1e-12);
    std::vector<float> z(static_cast<std::size_t>(embed_dim));
    for (std::int64_t i = 0; i < embed_dim; ++i) {
        z[static_cast<std::size_t>(i)] = static_cast<float>(u[static_cast<std::size_t>(i)] / r);
    }
    return z;
}

namespace {

struct Forward {
    std::vector<double> hidden;  // post-relu, empty for linear encoders
    std::vector<double> u;       // pre-normalization
    std::vector<double> z;       // normalized
    double r = 0.0;              // max(||u||, 1e-12)
};

void forward_pass(const EncoderWeights& enc, std::span<const float> x, Forward* f) {
    f->u.assign(static_cast<std::size_t>(enc.embed_dim), 0.0);
    if (enc.hidden_dim == 0) {
        for (std::int64_t i = 0; i < enc.embed_dim; ++i) {
            const double* w = enc.w1.data() + static_cast<std::size_t>(i * enc.input_dim);
            double acc = 0.0;
            for (std::int64_t d = 0; d < enc.input_dim; ++d) {
                acc += w[d] * x[static_cast<std::size_t>(d)];
            }
            f->u[static_cast<std::size_t>(i)] = acc;
        }
    } else {
        f->hidden.assign(static_cast<std::size_t>(enc.hidden_dim), 0.0);
        for (std::int64_t i = 0; i < enc.hidden_dim; ++i) {
            const double* w = enc.w1.data() + static_cast<std::size_t>(i * enc.input_dim);
            double acc = 0.0;
            for (std::int64_t d = 0; d < enc.input_dim; ++d) {
                acc += w[d] * x[static_cast<std::size_t>(d)];
            }
            f->hidden[static_cast<std::size_t>(i)] = acc > 0.0 ? acc : 0.0;
        }
        for (std::int64_t i = 0; i < enc.embed_dim; ++i) {
            const double* w = enc.w2.data() + static_cast<std::size_t>(i * enc.hidden_dim);
            double acc = 0.0;
            for (std::int64_t d = 0; d < enc.hidden_dim; ++d) {
                acc += w[d] * f->hidden[static_cast<std::size_t>(d)];
            }
            f->u[static_cast<std::size_t>(i)] = acc;
        }
    }
    double r = 0.0;
    for (double v : f->u) r += v * v;
    f->r = std::max(std::sqrt(r), 1e-12);
    f->z.assign(f->u.begin(), f->u.end());
    for (double& v : f->z) v /= f->r;
}

/// Accumulate dLoss/dW given dLoss/dz for one input.
void backward_pass(const EncoderWeights& enc, std::span<const float> x, const Forward& f,
                   std::span<const double> gz, EncoderWeights* grad) {
    // Through z = u / r:  du = (gz - z (z . gz)) / r.
    double zg = 0.0;
    for (std::int64_t i = 0; i < enc.embed_dim; ++i) {
        zg += f.z[static_cast<std::size_t>(i)] * gz[static_cast<std::size_t>(i)];
    }
    std::vector<double> gu(static_cast<std::size_t>(enc.embed_dim));
    for (std::int64_t i = 0; i < enc.embed_dim; ++i) {
        gu[static_cast<std::size_t>(i)] =
            (gz[static_cast<std::size_t>(i)] - f.z[static_cast<std::size_t>(i)] * zg) / f.r;
    }

    if (enc.hidden_dim == 0) {
        for (std::int64_t i = 0; i < enc.embed_dim; ++i) {
            double* gw = grad->w1.data() + static_cast<std::size_t>(i * enc.input_dim);
            for (std::int64_t d = 0; d < enc.input_dim; ++d) {
                gw[d] += gu[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(d)];
            }
        }
        return;
    }
    std::vector<double> gh(static_cast<std::size_t>(enc.hidden_dim), 0.0);
    for (std::int64_t i = 0; i < enc.embed_dim; ++i) {
        const double* w = enc.w2.data() + static_cast<std::size_t>(i * enc.hidden_dim);
        double* gw = grad->w2.data() + static_cast<std::size_t>(i * enc.hidden_dim);
        for (std::int64_t d = 0; d < enc.hidden_dim; ++d) {
            gw[d] += gu[static_cast<std::size_t>(i)] * f.hidden[static_cast<std::size_t>(d)];
            gh[static_cast<std::size_t>(d)] += w[d] * gu[static_cast<std::size_t>(i)];
        }
    }
    for (std::int64_t i = 0; i < enc.hidden_dim; ++i) {
        if (f.hidden[static_cast<std::size_t>(i)] <= 0.0) continue;  // relu gate
        double* gw = grad->w1.data() + static_cast<std::size_t>(i * enc.input_dim);
        for (std::int64_t d = 0; d < enc.input_dim; ++d) {
            gw[d] += gh[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(d)];
        }
    }
}

EncoderWeights zero_like(const EncoderWeights& enc) {
    EncoderWeights g;
    g.input_dim = enc.input_dim;
    g.hidden_dim = enc.hidden_dim;
    g.embed_dim = enc.embed_dim;
    g.w1.assign(enc.w1.size(), 0.0);
    g.w2.assign(enc.w2.size(), 0.0);
    return g;
}

}  // namespace

double tuple_batch_loss(const EncoderWeights& enc, const TupleBatch& batch, double temperature,
                        EncoderWeights* gradient) {
    const std::int64_t pairs = batch.anchors.rows;
    const std::int64_t k = batch.k;
    if (gradient) *gradient = zero_like(enc);

    Forward fa, fp;
    std::vector<Forward> fn(static_cast<std::size_t>(k));
    KahanSum total;
    for (std::int64_t p = 0; p < pairs; ++p) {
        forward_pass(enc, batch.anchors.row(p), &fa);
        forward_pass(enc, batch.positives.row(p), &fp);
        std::vector<double> logits(static_cast<std::size_t>(k) + 1);
        double acc = 0.0;
        for (std::int64_t i = 0; i < enc.embed_dim; ++i) {
            acc += fa.z[static_cast<std::size_t>(i)] * fp.z[static_cast<std::size_t>(i)];
        }
        logits[0] = acc / temperature;
        for (std::int64_t j = 0; j < k; ++j) {
            Forward& f = fn[static_cast<std::size_t>(j)];
            forward_pass(enc, batch.negatives.row(p * k + j), &f);
            acc = 0.0;
            for (std::int64_t i = 0; i < enc.embed_dim; ++i) {
                acc += fa.z[static_cast<std::size_t>(i)] * f.z[static_cast<std::size_t>(i)];
            }
            logits[static_cast<std::size_t>(j) + 1] = acc / temperature;
        }

        const double m = *std::max_element(logits.begin(), logits.end());
        double denom = 0.0;
        for (double l : logits) denom += std::exp(l - m);
        total.add(-(logits[0] - m) + std::log(denom));

        if (gradient) {
            // dLoss/dlogit_j = softmax_j - [j == 0]
            std::vector<double> gl(logits.size());
            for (std::size_t j = 0; j < logits.size(); ++j) {
                gl[j] = std::exp(logits[j] - m) / denom - (j == 0 ? 1.0 : 0.0);
            }
            const std::size_t ed = static_cast<std::size_t>(enc.embed_dim);
            std::vector<double> gza(ed, 0.0), gz(ed);
            // positive
            for (std::size_t i = 0; i < ed; ++i) {
                gza[i] += gl[0] * fp.z[i] / temperature;
                gz[i] = gl[0] * fa.z[i] / temperature;
            }
            backward_pass(enc, batch.positives.row(p), fp, gz, gradient);
            for (std::int64_t j = 0; j < k; ++j) {
                const Forward& f = fn[static_cast<std::size_t>(j)];
                const double g = gl[static_cast<std::size_t>(j) + 1];
                for (std::size_t i = 0; i < ed; ++i) {
                    gza[i] += g * f.z[i] / temperature;
                    gz[i] = g * fa.z[i] / temperature;
                }
                backward_pass(enc, batch.negatives.row(p * k + j), f, gz, gradient);
            }
            backward_pass(enc, batch.anchors.row(p), fa, gza, gradient);
        }
    }

    const double inv = 1.0 / static_cast<double>(pairs);
    if (gradient) {
        for (double& g : gradient->w1) g *= inv;
        for (double& g : gradient->w2) g *= inv;
    }
    return total.value() * inv;
}

namespace {

struct SplitView {
    std::vector<std::vector<std::int64_t>> class_rows;  // raw-dataset row ids per class
    std::vector<double> rho;                            // empirical class distribution
};

SplitView split_view(const RawDataset& data, const std::vector<std::int64_t>& rows) {
    SplitView v;
    v.class_rows.resize(static_cast<std::size_t>(data.n_classes));
    for (std::int64_t r : rows) {
        v.class_rows[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(r)])].push_back(r);
    }
    v.rho.resize(static_cast<std::size_t>(data.n_classes));
    for (std::size_t c = 0; c < v.class_rows.size(); ++c) {
        v.rho[c] = static_cast<double>(v.class_rows[c].size()) / static_cast<double>(rows.size());
    }
    return v;
}

int draw_from(const std::vector<double>& rho, CounterRng& rng) {
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t c = 0; c + 1 < rho.size(); ++c) {
        acc += rho[c];
        if (u < acc) return static_cast<int>(c);
    }
    return static_cast<int>(rho.size()) - 1;
}

TupleBatch sample_tuple_batch(const RawDataset& data, const SplitView& view,
                              const TrainConfig& config, CounterRng& rng) {
    const std::int64_t pairs = config.batch_pairs_per_step;
    const std::int64_t k = config.k_negatives;
    TupleBatch batch;
    batch.k = k;
    batch.anchors = Matrix(pairs, config.input_dim);
    batch.positives = Matrix(pairs, config.input_dim);
    batch.negatives = Matrix(pairs * k, config.input_dim);
    for (std::int64_t p = 0; p < pairs; ++p) {
        const int c = draw_from(view.rho, rng);
        const auto& members = view.class_rows[static_cast<std::size_t>(c)];
        const std::int64_t row = members[rng.uniform_below(members.size())];
        auto a = apply_augmentation(data.inputs.row(row), config.augmentation, rng);
        auto pos = apply_augmentation(data.inputs.row(row), config.augmentation, rng);
        std::copy(a.begin(), a.end(), batch.anchors.row(p).begin());
        std::copy(pos.begin(), pos.end(), batch.positives.row(p).begin());
        for (std::int64_t j = 0; j < k; ++j) {
            const int nc = draw_from(view.rho, rng);
            const auto& neg_members = view.class_rows[static_cast<std::size_t>(nc)];
            const std::int64_t neg_row = neg_members[rng.uniform_below(neg_members.size())];
            auto nv = apply_augmentation(data.inputs.row(neg_row), config.augmentation, rng);
            std::copy(nv.begin(), nv.end(), batch.negatives.row(p * k + j).begin());
        }
    }
    return batch;
}

EmbeddingSet encode_rows(const EncoderWeights& enc, const RawDataset& data,
                         const std::vector<std::int64_t>& rows) {
    Matrix features(static_cast<std::int64_t>(rows.size()), enc.embed_dim);
    std::vector<int> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto z = enc.encode(data.inputs.row(rows[i]));
        std::copy(z.begin(), z.end(), features.row(static_cast<std::int64_t>(i)).begin());
        labels[i] = data.labels[static_cast<std::size_t>(rows[i])];
    }
    return make_embedding_set(std::move(features), std::move(labels), data.n_classes, true);
}

}  // namespace

TrainResult train_encoder(const TrainConfig& config, const RawDataset& data, CounterRng rng) {
    config.validate();
    if (data.train_rows.empty()) throw std::invalid_argument("train_encoder: empty train split");

    EncoderWeights enc;
    enc.input_dim = config.input_dim;
    enc.hidden_dim = config.hidden_dim;
    enc.embed_dim = config.embed_dim;
    {
        CounterRng init_rng = rng.fork("init");
        const std::int64_t first_out = config.hidden_dim == 0 ? config.embed_dim : config.hidden_dim;
        enc.w1.resize(static_cast<std::size_t>(first_out * config.input_dim));
        const double s1 = 1.0 / std::sqrt(static_cast<double>(config.input_dim));
        for (double& w : enc.w1) w = s1 * init_rng.normal();
        if (config.hidden_dim > 0) {
            enc.w2.resize(static_cast<std::size_t>(config.embed_dim * config.hidden_dim));
            const double s2 = 1.0 / std::sqrt(static_cast<double>(config.hidden_dim));
            for (double& w : enc.w2) w = s2 * init_rng.normal();
        }
    }

    const SplitView view = split_view(data, data.train_rows);
    const std::int64_t steps_per_epoch =
        (static_cast<std::int64_t>(data.train_rows.size()) + config.batch_pairs_per_step - 1) /
        config.batch_pairs_per_step;
    const double divergence_ceiling =
        10.0 * std::log(static_cast<double>(config.k_negatives) + 1.0);

    TrainResult result;
    EncoderWeights grad;
    std::int64_t step_index = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<double> step_losses(static_cast<std::size_t>(steps_per_epoch));
        for (std::int64_t s = 0; s < steps_per_epoch; ++s, ++step_index) {
            CounterRng step_rng = rng.fork("step", static_cast<std::uint64_t>(step_index));
            const TupleBatch batch = sample_tuple_batch(data, view, config, step_rng);
            const double loss = tuple_batch_loss(enc, batch, config.temperature, &grad);
            step_losses[static_cast<std::size_t>(s)] = loss;
            for (std::size_t i = 0; i < enc.w1.size(); ++i) {
                enc.w1[i] -= config.learning_rate * grad.w1[i];
            }
            for (std::size_t i = 0; i < enc.w2.size(); ++i) {
                enc.w2[i] -= config.learning_rate * grad.w2[i];
            }
        }
        const MeanStderr ms = mean_stderr(step_losses);
        result.loss_trace.push_back({ms.mean, ms.std_error});
        if (!std::isfinite(ms.mean) || ms.mean > divergence_ceiling) {
            std::vector<double> trace;
            for (const EpochLoss& e : result.loss_trace) trace.push_back(e.value);
            std::ostringstream os;
            os << "train_encoder: loss " << ms.mean << " above divergence ceiling "
               << divergence_ceiling << " at epoch " << epoch;
            throw DivergenceError(os.str(), std::move(trace));
        }
    }

    result.encoder = std::move(enc);
    result.train_embeddings = encode_rows(result.encoder, data, data.train_rows);
    result.val_embeddings = encode_rows(result.encoder, data, data.val_rows);
    return result;
}

ClassifierEval evaluate_classifiers(const EmbeddingSet& train, const EmbeddingSet& val,
                                    const EvalClassifierOptions& opts, CounterRng rng) {
    ClassifierEval eval;
    const MeanRepresentations means =
        compute_class_means(train, opts.augmentation, opts.m_augmentations, rng.fork("means"));
    eval.mean_acc = mean_classifier_accuracy(means, val);
    ProbeOptions popts;
    popts.epochs = opts.probe_epochs;
    popts.learning_rate = opts.probe_learning_rate;
    popts.init_from_means = &means;
    const ProbeResult probe = train_linear_probe(train, popts);
    eval.probe_acc = probe_accuracy(probe, val);
    return eval;
}

std::string loss_trace_csv(const std::vector<EpochLoss>& trace) {
    std::ostringstream os;
    os << "epoch,loss,stderr\n";
    char buf[64];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g", i, trace[i].value, trace[i].std_error);
        os << buf << '\n';
    }
    return os.str();
}

}  // namespace negbound
