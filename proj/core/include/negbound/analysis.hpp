#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "negbound/embedding.hpp"

namespace negbound {

struct Histogram {
    std::vector<double> bin_edges;       // sorted, size = bins + 1
    std::vector<std::int64_t> counts;    // size = bins
    std::int64_t total = 0;

    void validate() const;
};

/// Values binned over [range_lo, range_hi] into n_bins equal-width bins;
/// the top edge is inclusive.
Histogram make_histogram(std::span<const double> values, int n_bins,
                         std::optional<std::pair<double, double>> range = std::nullopt);

/// All i<j cosine pairs within one class; default bin count is
/// floor(sqrt(#pairs)).
Histogram within_class_cosine_histogram(const EmbeddingSet& set, int class_id,
                                        std::optional<int> n_bins = std::nullopt,
                                        std::optional<std::pair<double, double>> range = std::nullopt);

/// Row-norm histogram of an unnormalized set, floor(sqrt(N)) bins.  A shared
/// range across compared sets may be supplied to unify bins.
Histogram norm_histogram(const EmbeddingSet& set,
                         std::optional<std::pair<double, double>> range = std::nullopt,
                         std::optional<int> n_bins = std::nullopt);

/// First Wasserstein distance between two histograms on identical edges,
/// via the cumulative-difference integral over bin midpoints.
double wasserstein1(const Histogram& a, const Histogram& b);

/// Each distance divided by the reference distance.
std::vector<double> relative_change_curve(double reference,
                                          std::span<const double> distances);

/// Numerical check of the constant-score optimality statement: gradient
/// descent on the subset-frequency-weighted sub-class loss over a constant
/// score vector q converges to a uniform vector.
struct Prop2Result {
    std::vector<double> optimal_scores;   // mean-centered q*
    double spread = 0.0;                  // max(q*) - min(q*)
    double loss_at_optimum = 0.0;
    double gradient_norm_at_uniform = 0.0;  // stationarity residual, analytic form
    bool enumerated = false;              // exact subset family vs sampled
};

struct Prop2Options {
    std::int64_t max_steps = 200'000;
    double learning_rate = 0.5;
    double gradient_tolerance = 1e-10;
    std::int64_t mc_draws = 200'000;  // used when enumeration is infeasible
    std::uint64_t seed = 7;
};

/// Enumerates all rho^{k+1} draws exactly for n_classes <= 6 and k <= 6
/// (uniform rho), samples them otherwise.
Prop2Result verify_prop2(int n_classes, std::int64_t k, const Prop2Options& opts = {});

/// CSV emission: bin_lo,bin_hi,count rows.
std::string histogram_csv(const Histogram& h);

}  // namespace negbound
