#include "negbound/embedding.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace negbound {

namespace {

constexpr double kUnitNormTolerance = 1e-6;

std::vector<std::int64_t> count_classes(const std::vector<int>& labels, int n_classes) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || y >= n_classes) {
            std::ostringstream os;
            os << "EmbeddingSet: label " << y << " at row " << i << " outside [0, " << n_classes
               << ")";
            throw std::invalid_argument(os.str());
        }
        ++counts[static_cast<std::size_t>(y)];
    }
    return counts;
}

}  // namespace

void EmbeddingSet::validate() const {
    if (features.rows != static_cast<std::int64_t>(labels.size())) {
        throw std::invalid_argument("EmbeddingSet: feature rows and label count differ");
    }
    const auto counts = count_classes(labels, n_classes);
    if (counts != class_counts) {
        throw std::invalid_argument("EmbeddingSet: class_counts inconsistent with labels");
    }
    if (normalized) {
        for (std::int64_t i = 0; i < features.rows; ++i) {
            const double n = std::sqrt(squared_norm(features.row(i)));
            if (std::abs(n - 1.0) > kUnitNormTolerance) {
                std::ostringstream os;
                os << "EmbeddingSet: row " << i << " has norm " << n
                   << " but the set is flagged normalized";
                throw std::invalid_argument(os.str());
            }
        }
    }
}

EmbeddingSet make_embedding_set(Matrix features, std::vector<int> labels, int n_classes,
                                bool normalized) {
    EmbeddingSet set;
    set.class_counts = count_classes(labels, n_classes);
    set.features = std::move(features);
    set.labels = std::move(labels);
    set.n_classes = n_classes;
    set.normalized = normalized;
    set.validate();
    return set;
}

EmbeddingSet l2_normalize(const EmbeddingSet& set) {
    EmbeddingSet out = set;
    for (std::int64_t i = 0; i < out.features.rows; ++i) {
        auto row = out.features.row(i);
        const double n = std::sqrt(squared_norm(row));
        if (n == 0.0) {
            std::ostringstream os;
            os << "l2_normalize: row " << i << " has zero norm";
            throw std::invalid_argument(os.str());
        }
        for (float& v : row) v = static_cast<float>(static_cast<double>(v) / n);
    }
    out.normalized = true;
    return out;
}

ClassDistribution empirical_distribution(const EmbeddingSet& set) {
    std::vector<double> p;
    p.reserve(set.class_counts.size());
    const double n = static_cast<double>(set.size());
    for (std::int64_t c : set.class_counts) {
        if (c == 0) {
            throw std::invalid_argument(
                "empirical_distribution: a class has no members; supply an explicit "
                "ClassDistribution");
        }
        p.push_back(static_cast<double>(c) / n);
    }
    return ClassDistribution(std::move(p));
}

void AugmentationSpec::validate() const {
    if (sigma < 0.0) throw std::invalid_argument("AugmentationSpec: sigma must be >= 0");
    if (drop_rate < 0.0 || drop_rate >= 1.0) {
        throw std::invalid_argument("AugmentationSpec: drop_rate must be in [0, 1)");
    }
}

std::vector<float> apply_augmentation(std::span<const float> x, const AugmentationSpec& spec,
                                      CounterRng& rng) {
    spec.validate();
    const bool noise = spec.kind != AugmentationKind::coordinate_dropout;
    const bool drop = spec.kind != AugmentationKind::gaussian_noise;

    std::vector<float> out(x.begin(), x.end());
    if (noise && spec.sigma > 0.0) {
        for (float& v : out) {
            v = static_cast<float>(static_cast<double>(v) + spec.sigma * rng.normal());
        }
    }
    if (drop && spec.drop_rate > 0.0) {
        for (int attempt = 0; attempt < 100; ++attempt) {
            std::vector<float> dropped = out;
            bool any_kept = false;
            for (float& v : dropped) {
                if (rng.uniform01() < spec.drop_rate) {
                    v = 0.0f;
                } else if (v != 0.0f) {
                    any_kept = true;
                }
            }
            if (any_kept || !spec.renormalize) {
                out = std::move(dropped);
                break;
            }
            if (attempt == 99) {
                throw std::runtime_error(
                    "apply_augmentation: dropout left a zero vector 100 times in a row");
            }
        }
    }
    if (spec.renormalize) {
        double n = 0.0;
        for (float v : out) n += static_cast<double>(v) * static_cast<double>(v);
        n = std::sqrt(n);
        if (n == 0.0) {
            throw std::runtime_error("apply_augmentation: cannot renormalize a zero vector");
        }
        for (float& v : out) v = static_cast<float>(static_cast<double>(v) / n);
    }
    return out;
}

namespace {

int draw_class(const ClassDistribution& rho, CounterRng& rng) {
    const auto& p = rho.probs();
    if (rho.is_uniform()) {
        return static_cast<int>(rng.uniform_below(p.size()));
    }
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t c = 0; c + 1 < p.size(); ++c) {
        acc += p[c];
        if (u < acc) return static_cast<int>(c);
    }
    return static_cast<int>(p.size()) - 1;
}

std::int64_t draw_member(const ClassRowIndex& index, int cls, CounterRng& rng) {
    const auto& members = index.rows[static_cast<std::size_t>(cls)];
    if (members.empty()) {
        std::ostringstream os;
        os << "sample_batch: class " << cls << " has no members in the set";
        throw std::invalid_argument(os.str());
    }
    return members[rng.uniform_below(members.size())];
}

}  // namespace

ClassRowIndex build_class_index(const EmbeddingSet& set) {
    ClassRowIndex index;
    index.rows.resize(static_cast<std::size_t>(set.n_classes));
    for (std::int64_t i = 0; i < set.size(); ++i) {
        index.rows[static_cast<std::size_t>(set.labels[static_cast<std::size_t>(i)])].push_back(i);
    }
    return index;
}

ContrastiveBatch sample_batch(const EmbeddingSet& set, const AugmentationSpec& spec,
                              std::int64_t k, CounterRng& rng, const ClassDistribution* rho) {
    const ClassDistribution dist = rho ? *rho : empirical_distribution(set);
    return sample_batch(set, build_class_index(set), dist, spec, k, rng);
}

ContrastiveBatch sample_batch(const EmbeddingSet& set, const ClassRowIndex& index,
                              const ClassDistribution& rho, const AugmentationSpec& spec,
                              std::int64_t k, CounterRng& rng) {
    if (k < 1) throw std::invalid_argument("sample_batch: k must be >= 1");
    if (rho.size() != set.n_classes) {
        throw std::invalid_argument("sample_batch: distribution size differs from n_classes");
    }

    ContrastiveBatch batch;
    batch.anchor_class = draw_class(rho, rng);
    const std::int64_t anchor_row = draw_member(index, batch.anchor_class, rng);
    batch.anchor = apply_augmentation(set.features.row(anchor_row), spec, rng);
    batch.positive = apply_augmentation(set.features.row(anchor_row), spec, rng);

    batch.negatives = Matrix(k, set.dim());
    batch.negative_classes.resize(static_cast<std::size_t>(k));
    for (std::int64_t j = 0; j < k; ++j) {
        const int cls = draw_class(rho, rng);
        batch.negative_classes[static_cast<std::size_t>(j)] = cls;
        const std::int64_t row = draw_member(index, cls, rng);
        const auto v = apply_augmentation(set.features.row(row), spec, rng);
        auto dst = batch.negatives.row(j);
        std::copy(v.begin(), v.end(), dst.begin());
    }
    return batch;
}

MeanRepresentations compute_class_means(const EmbeddingSet& set, const AugmentationSpec& spec,
                                        int m_augmentations, CounterRng rng) {
    if (m_augmentations < 1) {
        throw std::invalid_argument("compute_class_means: m_augmentations must be >= 1");
    }
    for (int c = 0; c < set.n_classes; ++c) {
        if (set.class_counts[static_cast<std::size_t>(c)] == 0) {
            std::ostringstream os;
            os << "compute_class_means: class " << c << " is empty";
            throw std::invalid_argument(os.str());
        }
    }

    const std::int64_t n = set.size();
    const std::int64_t h = set.dim();
    MeanRepresentations out;
    out.augmentations_per_sample = m_augmentations;
    out.per_sample_means = Matrix(n, h);
    out.class_means = Matrix(set.n_classes, h);

    std::vector<double> acc(static_cast<std::size_t>(h));
    for (std::int64_t i = 0; i < n; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        CounterRng sample_rng = rng.fork("class_means", static_cast<std::uint64_t>(i));
        for (int j = 0; j < m_augmentations; ++j) {
            const auto v = apply_augmentation(set.features.row(i), spec, sample_rng);
            for (std::int64_t d = 0; d < h; ++d) acc[static_cast<std::size_t>(d)] += v[static_cast<std::size_t>(d)];
        }
        auto dst = out.per_sample_means->row(i);
        for (std::int64_t d = 0; d < h; ++d) {
            dst[static_cast<std::size_t>(d)] =
                static_cast<float>(acc[static_cast<std::size_t>(d)] / m_augmentations);
        }
    }

    std::vector<double> class_acc(static_cast<std::size_t>(set.n_classes * h), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        const int y = set.labels[static_cast<std::size_t>(i)];
        const auto mu = out.per_sample_means->row(i);
        for (std::int64_t d = 0; d < h; ++d) {
            class_acc[static_cast<std::size_t>(y * h + d)] += mu[static_cast<std::size_t>(d)];
        }
    }
    for (int c = 0; c < set.n_classes; ++c) {
        const double count = static_cast<double>(set.class_counts[static_cast<std::size_t>(c)]);
        auto dst = out.class_means.row(c);
        for (std::int64_t d = 0; d < h; ++d) {
            dst[static_cast<std::size_t>(d)] =
                static_cast<float>(class_acc[static_cast<std::size_t>(c * h + d)] / count);
        }
    }
    return out;
}

}  // namespace negbound
