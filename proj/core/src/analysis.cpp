#include "negbound/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "negbound/error.hpp"
#include "negbound/parallel.hpp"

namespace negbound {

void Histogram::validate() const {
    if (bin_edges.size() < 2 || counts.size() + 1 != bin_edges.size()) {
        throw std::invalid_argument("Histogram: need len(counts) = len(bin_edges) - 1");
    }
    if (!std::is_sorted(bin_edges.begin(), bin_edges.end())) {
        throw std::invalid_argument("Histogram: bin edges must be sorted");
    }
    std::int64_t sum = 0;
    for (std::int64_t c : counts) {
        if (c < 0) throw std::invalid_argument("Histogram: negative count");
        sum += c;
    }
    if (sum != total) throw std::invalid_argument("Histogram: counts do not sum to total");
}

Histogram make_histogram(std::span<const double> values, int n_bins,
                         std::optional<std::pair<double, double>> range) {
    if (values.empty()) throw std::invalid_argument("make_histogram: no values");
    if (n_bins < 1) throw std::invalid_argument("make_histogram: n_bins must be >= 1");
    double lo, hi;
    if (range) {
        lo = range->first;
        hi = range->second;
    } else {
        lo = *std::min_element(values.begin(), values.end());
        hi = *std::max_element(values.begin(), values.end());
    }
    if (!(lo <= hi)) throw std::invalid_argument("make_histogram: invalid range");
    if (lo == hi) hi = lo + 1.0;  // all-equal values occupy the first bin

    Histogram h;
    h.bin_edges.resize(static_cast<std::size_t>(n_bins) + 1);
    const double width = (hi - lo) / n_bins;
    for (int i = 0; i <= n_bins; ++i) {
        h.bin_edges[static_cast<std::size_t>(i)] = lo + width * i;
    }
    h.bin_edges.back() = hi;
    h.counts.assign(static_cast<std::size_t>(n_bins), 0);
    for (double v : values) {
        if (v < lo || v > hi) {
            std::ostringstream os;
            os << "make_histogram: value " << v << " outside range [" << lo << ", " << hi << "]";
            throw std::invalid_argument(os.str());
        }
        int bin = static_cast<int>((v - lo) / width);
        if (bin >= n_bins) bin = n_bins - 1;  // top edge inclusive
        ++h.counts[static_cast<std::size_t>(bin)];
    }
    h.total = static_cast<std::int64_t>(values.size());
    h.validate();
    return h;
}

Histogram within_class_cosine_histogram(const EmbeddingSet& set, int class_id,
                                        std::optional<int> n_bins,
                                        std::optional<std::pair<double, double>> range) {
    if (class_id < 0 || class_id >= set.n_classes) {
        throw std::invalid_argument("within_class_cosine_histogram: bad class id");
    }
    std::vector<std::int64_t> rows;
    for (std::int64_t i = 0; i < set.size(); ++i) {
        if (set.labels[static_cast<std::size_t>(i)] == class_id) rows.push_back(i);
    }
    if (rows.size() < 2) {
        std::ostringstream os;
        os << "within_class_cosine_histogram: class " << class_id << " has " << rows.size()
           << " member(s), need at least 2";
        throw std::invalid_argument(os.str());
    }
    std::vector<double> norms(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        norms[i] = std::sqrt(squared_norm(set.features.row(rows[i])));
        if (norms[i] == 0.0) {
            throw std::invalid_argument("within_class_cosine_histogram: zero-norm row");
        }
    }
    std::vector<double> cosines;
    cosines.reserve(rows.size() * (rows.size() - 1) / 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
            cosines.push_back(dot(set.features.row(rows[i]), set.features.row(rows[j])) /
                              (norms[i] * norms[j]));
        }
    }
    const int bins = n_bins.value_or(
        std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(cosines.size()))))));
    return make_histogram(cosines, bins, range);
}

Histogram norm_histogram(const EmbeddingSet& set, std::optional<std::pair<double, double>> range,
                         std::optional<int> n_bins) {
    if (set.normalized) {
        throw std::invalid_argument("norm_histogram: expects an unnormalized set");
    }
    if (set.size() == 0) throw std::invalid_argument("norm_histogram: empty set");
    std::vector<double> norms(static_cast<std::size_t>(set.size()));
    for (std::int64_t i = 0; i < set.size(); ++i) {
        norms[static_cast<std::size_t>(i)] = std::sqrt(squared_norm(set.features.row(i)));
    }
    const int bins = n_bins.value_or(
        std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(set.size()))))));
    return make_histogram(norms, bins, range);
}

double wasserstein1(const Histogram& a, const Histogram& b) {
    a.validate();
    b.validate();
    if (a.bin_edges != b.bin_edges) {
        throw std::invalid_argument("wasserstein1: histograms live on different bin edges");
    }
    if (a.total < 1 || b.total < 1) {
        throw std::invalid_argument("wasserstein1: both histograms need mass");
    }
    // Mass sits at bin midpoints; W1 in 1-D is the integral of |CDF_a - CDF_b|,
    // which between consecutive midpoints is constant.
    const std::size_t bins = a.counts.size();
    double w = 0.0;
    double cdf_a = 0.0, cdf_b = 0.0;
    for (std::size_t i = 0; i + 1 < bins; ++i) {
        cdf_a += static_cast<double>(a.counts[i]) / static_cast<double>(a.total);
        cdf_b += static_cast<double>(b.counts[i]) / static_cast<double>(b.total);
        const double mid_i = 0.5 * (a.bin_edges[i] + a.bin_edges[i + 1]);
        const double mid_next = 0.5 * (a.bin_edges[i + 1] + a.bin_edges[i + 2]);
        w += std::abs(cdf_a - cdf_b) * (mid_next - mid_i);
    }
    return w;
}

std::vector<double> relative_change_curve(double reference, std::span<const double> distances) {
    if (!(reference > 0.0)) {
        throw NumericError("relative_change_curve: reference distance must be positive");
    }
    std::vector<double> out;
    out.reserve(distances.size());
    for (double d : distances) out.push_back(d / reference);
    return out;
}

namespace {

/// Weighted (anchor, subset) families for the sub-class loss.  The subset is
/// kept as a sorted class list; weights are draw probabilities.
struct SubsetFamily {
    struct Entry {
        int anchor;
        std::vector<int> classes;
        double weight;
    };
    std::vector<Entry> entries;
};

SubsetFamily enumerate_family(int n_classes, std::int64_t k) {
    SubsetFamily family;
    std::map<std::pair<int, std::vector<int>>, double> weights;
    const double draw_p = 1.0 / std::pow(static_cast<double>(n_classes),
                                         static_cast<double>(k) + 1.0);
    std::vector<int> draw(static_cast<std::size_t>(k) + 1, 0);
    for (;;) {
        std::vector<bool> seen(static_cast<std::size_t>(n_classes), false);
        for (int c : draw) seen[static_cast<std::size_t>(c)] = true;
        std::vector<int> classes;
        for (int c = 0; c < n_classes; ++c) {
            if (seen[static_cast<std::size_t>(c)]) classes.push_back(c);
        }
        weights[{draw[0], classes}] += draw_p;

        // odometer over the |C|^{k+1} draws
        std::size_t pos = draw.size();
        while (pos > 0 && ++draw[pos - 1] == n_classes) {
            draw[--pos] = 0;
        }
        if (pos == 0) break;
    }
    for (auto& [key, w] : weights) {
        family.entries.push_back({key.first, key.second, w});
    }
    return family;
}

SubsetFamily sample_family(int n_classes, std::int64_t k, std::int64_t draws,
                           std::uint64_t seed) {
    SubsetFamily family;
    std::map<std::pair<int, std::vector<int>>, double> weights;
    const double w = 1.0 / static_cast<double>(draws);
    for (std::int64_t t = 0; t < draws; ++t) {
        CounterRng rng(seed, "prop2_mc", static_cast<std::uint64_t>(t));
        std::vector<bool> seen(static_cast<std::size_t>(n_classes), false);
        const int anchor = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n_classes)));
        seen[static_cast<std::size_t>(anchor)] = true;
        for (std::int64_t j = 0; j < k; ++j) {
            seen[rng.uniform_below(static_cast<std::uint64_t>(n_classes))] = true;
        }
        std::vector<int> classes;
        for (int c = 0; c < n_classes; ++c) {
            if (seen[static_cast<std::size_t>(c)]) classes.push_back(c);
        }
        weights[{anchor, classes}] += w;
    }
    for (auto& [key, wt] : weights) {
        family.entries.push_back({key.first, key.second, wt});
    }
    return family;
}

double family_loss_and_grad(const SubsetFamily& family, const std::vector<double>& q,
                            std::vector<double>* grad) {
    if (grad) std::fill(grad->begin(), grad->end(), 0.0);
    KahanSum loss;
    for (const auto& e : family.entries) {
        double m = q[static_cast<std::size_t>(e.classes[0])];
        for (int c : e.classes) m = std::max(m, q[static_cast<std::size_t>(c)]);
        double denom = 0.0;
        for (int c : e.classes) denom += std::exp(q[static_cast<std::size_t>(c)] - m);
        loss.add(e.weight * (-(q[static_cast<std::size_t>(e.anchor)] - m) + std::log(denom)));
        if (grad) {
            for (int c : e.classes) {
                (*grad)[static_cast<std::size_t>(c)] +=
                    e.weight * std::exp(q[static_cast<std::size_t>(c)] - m) / denom;
            }
            (*grad)[static_cast<std::size_t>(e.anchor)] -= e.weight;
        }
    }
    return loss.value();
}

/// Stationarity residual in the grouped form: for each class, the weighted
/// sum over subsets of (1 - |subset| * softmax_anchor) at the supplied q,
/// grouping the family entries by their anchor.
double grouped_stationarity_norm(const SubsetFamily& family, const std::vector<double>& q) {
    std::vector<double> residual(q.size(), 0.0);
    for (const auto& e : family.entries) {
        double denom = 0.0;
        for (int c : e.classes) denom += std::exp(q[static_cast<std::size_t>(c)]);
        const double softmax_anchor = std::exp(q[static_cast<std::size_t>(e.anchor)]) / denom;
        residual[static_cast<std::size_t>(e.anchor)] +=
            e.weight * (1.0 - static_cast<double>(e.classes.size()) * softmax_anchor);
    }
    double norm = 0.0;
    for (double r : residual) norm += r * r;
    return std::sqrt(norm);
}

}  // namespace

Prop2Result verify_prop2(int n_classes, std::int64_t k, const Prop2Options& opts) {
    if (n_classes < 2) throw std::invalid_argument("verify_prop2: need at least 2 classes");
    if (k < 1) throw std::invalid_argument("verify_prop2: k must be >= 1");

    Prop2Result result;
    result.enumerated = n_classes <= 6 && k <= 6;
    const SubsetFamily family = result.enumerated
                                    ? enumerate_family(n_classes, k)
                                    : sample_family(n_classes, k, opts.mc_draws, opts.seed);

    const std::vector<double> uniform_q(static_cast<std::size_t>(n_classes), 0.0);
    result.gradient_norm_at_uniform = grouped_stationarity_norm(family, uniform_q);

    // Deliberately asymmetric start; convexity carries descent to the optimum.
    std::vector<double> q(static_cast<std::size_t>(n_classes));
    for (int c = 0; c < n_classes; ++c) {
        q[static_cast<std::size_t>(c)] = 0.5 * static_cast<double>(c % 3) - 0.25;
    }

    std::vector<double> grad(q.size());
    bool converged = false;
    for (std::int64_t step = 0; step < opts.max_steps; ++step) {
        family_loss_and_grad(family, q, &grad);
        double gnorm = 0.0;
        for (double g : grad) gnorm += g * g;
        gnorm = std::sqrt(gnorm);
        if (gnorm < opts.gradient_tolerance) {
            converged = true;
            break;
        }
        for (std::size_t i = 0; i < q.size(); ++i) q[i] -= opts.learning_rate * grad[i];
        // pin the softmax shift direction
        double mean = 0.0;
        for (double v : q) mean += v;
        mean /= static_cast<double>(q.size());
        for (double& v : q) v -= mean;
    }
    if (!converged) {
        std::ostringstream os;
        os << "verify_prop2: gradient descent did not reach tolerance "
           << opts.gradient_tolerance << " within " << opts.max_steps << " steps";
        throw NumericError(os.str());
    }

    result.loss_at_optimum = family_loss_and_grad(family, q, nullptr);
    result.spread = *std::max_element(q.begin(), q.end()) - *std::min_element(q.begin(), q.end());
    result.optimal_scores = std::move(q);
    return result;
}

std::string histogram_csv(const Histogram& h) {
    std::ostringstream os;
    os << "bin_lo,bin_hi,count\n";
    char buf[96];
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%lld", h.bin_edges[i], h.bin_edges[i + 1],
                      static_cast<long long>(h.counts[i]));
        os << buf << '\n';
    }
    return os.str();
}

}  // namespace negbound
