#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "negbound/embedding.hpp"
#include "negbound/losses.hpp"
#include "negbound/prob.hpp"

namespace negbound {

/// Collision count and distinct-class set of one sampled batch's latent
/// class draws {c} u {c_k-}.
struct CollisionStats {
    int col = 0;                // number of negatives sharing the anchor class
    std::vector<int> c_sub;     // sorted distinct class ids, anchor included
    bool covers_all = false;    // c_sub == all classes
};

CollisionStats collision_stats(int anchor_class, std::span<const int> negative_classes,
                               int n_classes);

/// Class-level probabilities entering the bounds as coefficients.  Computed
/// from closed forms / exact coverage routes where available, otherwise from
/// a dedicated Monte-Carlo pass over rho alone; never from the (small)
/// embedding-level batch sample.
struct ClassLevelProbs {
    double tau = 0.0;                  // P(Col != 0) over K negatives
    double upsilon = 0.0;              // P(K+1 draws cover C)
    double p_cover_given_nocol = 0.0;  // P(C_sub = C | Col = 0)
    double expected_log_col1 = 0.0;    // E[ln(Col + 1)], exact
    ProbMethod coverage_method = ProbMethod::dp;
};

struct ClassProbOptions {
    std::int64_t mc_draws = 1'000'000;
    std::uint64_t mc_seed = 0;
    int threads = 0;
    /// Number of draws defining the covers-all event: K+1 under the default
    /// `k` convention, K+2 under `k-plus-1`.
    int extra_draws = 1;
};

ClassLevelProbs class_level_probs(const ClassDistribution& rho, std::int64_t k,
                                  const ClassProbOptions& opts = {});

/// One conditional term of a decomposed bound: its class-level coefficient
/// and the embedding-level conditional mean.  A slice that received no
/// batches while its coefficient is positive is reported absent (the total
/// then carries the partial flag); a slice whose coefficient is exactly zero
/// contributes exactly zero.
struct BoundTerm {
    double coefficient = 0.0;
    LossEstimate conditional;
    bool present = true;

    double value() const { return present ? coefficient * conditional.value : 0.0; }
    double std_error() const { return present ? coefficient * conditional.std_error : 0.0; }
};

struct BoundTerms {
    BoundTerm sup;        // covers-all slice, scored against the full class set
    BoundTerm sub;        // remaining slice, scored against the batch's C_sub
    BoundTerm collision;  // ln(Col + 1) slice
    LossEstimate d_f;
    bool partial = false;

    double total() const { return sup.value() + sub.value() + collision.value() + d_f.value; }
    double total_std_error() const;
};

struct EvalOptions {
    double temperature = 1.0;
    std::int64_t n_batches = 0;
    int threads = 0;
    int extra_draws = 1;  // covers-all convention, see ClassProbOptions
};

/// Conditional decomposition of the collision-probability lower bound:
/// (1-tau) E[L_sub(C_sub) | Col=0] + tau E[ln(Col+1) | Col!=0] + d(f),
/// with the no-collision slice split into its covers-all and sub-class
/// parts.  `rho` defaults to the empirical distribution of `set`.
BoundTerms evaluate_curl_bound(const EmbeddingSet& set, const MeanRepresentations& means,
                               const AugmentationSpec& spec, std::int64_t k,
                               const EvalOptions& opts, CounterRng rng,
                               const ClassDistribution* rho = nullptr);

/// Conditional decomposition of the coupon-collector lower bound:
/// 1/2 { upsilon E[L_sub(C) | covers] + (1-upsilon) E[L_sub(C_sub) | !covers]
///       + E[ln(Col+1)] } + d(f).
BoundTerms evaluate_proposed_bound(const EmbeddingSet& set, const MeanRepresentations& means,
                                   const AugmentationSpec& spec, std::int64_t k,
                                   const EvalOptions& opts, CounterRng rng,
                                   const ClassDistribution* rho = nullptr);

/// Empirical collision-term upper bound (two fresh augmentations per
/// sample, constants alpha/beta excluded):
/// (1/N) sum_i (1/N_{y_i}) sum_{j != i} 1[y_i = y_j] |z_i . (z_j - z_i+)|.
/// `singleton_classes`, when given, receives the number of classes whose
/// single member contributed an empty inner sum.
LossEstimate collision_upper_bound(const EmbeddingSet& set, const AugmentationSpec& spec,
                                   CounterRng rng, int threads = 0,
                                   int* singleton_classes = nullptr);

enum class BoundVariant { curl, proposed };

/// A supervised-loss upper bound obtained by rearranging a lower bound.
/// Denominators below 1e-12 flag the value infinite instead of throwing.
struct SupUpperBound {
    double value = std::numeric_limits<double>::infinity();
    bool flagged_infinite = true;
};

/// Everything needed for one report row.
struct BoundReport {
    std::int64_t k_plus_1 = 0;
    double temperature = 1.0;
    LossEstimate l_info;
    LossEstimate d_f;
    ClassLevelProbs probs;
    BoundTerms curl;
    BoundTerms proposed;
    LossEstimate collision_bound;  // empirical Eq.-16 value
    SupUpperBound sup_ub_curl;
    SupUpperBound sup_ub_proposed;
    double mean_acc = std::numeric_limits<double>::quiet_NaN();
    double probe_acc = std::numeric_limits<double>::quiet_NaN();
    std::int64_t n_batches = 0;
    std::string note;  // emitted discrepancy / degeneracy notes
};

SupUpperBound sup_upper_bound(const BoundReport& report, BoundVariant variant);

/// Inputs for assembling a full report row.
struct ReportInputs {
    const EmbeddingSet* eval_set = nullptr;        // losses and slices
    const EmbeddingSet* collision_set = nullptr;   // Eq.-16 set (training data); may equal eval
    const MeanRepresentations* means = nullptr;
    const ClassDistribution* rho = nullptr;        // defaults to empirical of eval_set
    double mean_acc = std::numeric_limits<double>::quiet_NaN();
    double probe_acc = std::numeric_limits<double>::quiet_NaN();
};

/// One full row: shared batch scoring for L_info and both bounds, class-level
/// coefficients, the Eq.-16 term, and both supervised upper bounds.
BoundReport evaluate_bound_report(const ReportInputs& in, const AugmentationSpec& spec,
                                  std::int64_t k, const EvalOptions& opts, CounterRng rng);

/// CSV with one row per report; columns fixed by the reporting contract.
std::string bound_report_csv_header();
std::string bound_report_csv_row(const BoundReport& r);

/// JSON with per-term standard errors.
std::string bound_reports_json(const std::vector<BoundReport>& reports);

}  // namespace negbound
