#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace negbound {

/// Probability distribution over latent classes.
///
/// Entries must lie in (0, 1] and sum to 1 within 1e-12.  The uniform flag
/// is derived (all entries equal within 1e-12), never stored by callers.
class ClassDistribution {
public:
    explicit ClassDistribution(std::vector<double> probs);
    static ClassDistribution uniform(int n_classes);

    const std::vector<double>& probs() const { return probs_; }
    int size() const { return static_cast<int>(probs_.size()); }
    bool is_uniform() const { return uniform_; }
    double min_prob() const { return min_prob_; }

private:
    std::vector<double> probs_;
    bool uniform_ = false;
    double min_prob_ = 0.0;
};

enum class ProbMethod {
    closed_form,
    dp,
    inclusion_exclusion,
    quadrature,
    monte_carlo,
};

std::string_view to_string(ProbMethod m);

/// A probability value with its normal-approximation standard error.
/// Exact methods report std_error = 0.  The raw value is stored unclamped.
struct ProbEstimate {
    double value = 0.0;
    double std_error = 0.0;
    ProbMethod method = ProbMethod::closed_form;
};

/// P(Col != 0): the probability that at least one of k negatives drawn
/// i.i.d. from rho shares the anchor's latent class, 1 - sum_c rho(c)(1-rho(c))^k.
ProbEstimate collision_probability(const ClassDistribution& dist, std::int64_t k);

enum class CoverageMethod { automatic, dp, inclusion_exclusion, monte_carlo };

struct CoverageOptions {
    CoverageMethod method = CoverageMethod::automatic;
    std::int64_t mc_trials = 1'000'000;
    std::uint64_t mc_seed = 0;
    int threads = 0;  // 0 = resolve from env/hardware
};

/// Probability that `draws` i.i.d. samples from rho contain every class.
///
/// Uniform distributions use a distinct-count DP as the authoritative method
/// with an inclusion-exclusion cross-check (the two must agree to 1e-10
/// whenever the alternating sum is numerically healthy).  Non-uniform
/// distributions use subset inclusion-exclusion up to 20 classes and
/// Monte-Carlo beyond.  Returns exactly 0 when draws < |C|.
ProbEstimate all_classes_probability(const ClassDistribution& dist, std::int64_t draws,
                                     const CoverageOptions& opts = {});

/// Coupon-collector stopping time pmf P(T = n) for a uniform distribution:
/// sum_{m=0}^{|C|-1} C(|C|-1,m) (-1)^m (1-(m+1)/|C|)^{n-1}.
/// Prefix sums over n reproduce all_classes_probability.
double coupon_pmf(const ClassDistribution& dist, std::int64_t n);

struct ExpectedDraws {
    double value = 0.0;     // E[number of draws to cover every class]
    double ceil_value = 0.0;
    double abs_error = 0.0;  // achieved quadrature error estimate
};

/// Expected number of draws to observe every class, via adaptive quadrature
/// of integral_0^inf (1 - prod_c [1 - e^{-rho(c) x}]) dx after substituting
/// u = e^{-x/s} with s = 1/min_c rho(c).  Uniform inputs are cross-checked
/// against |C| * H_{|C|}.
ExpectedDraws expected_draws(const ClassDistribution& dist);

/// Monte-Carlo estimate of all_classes_probability; the oracle used by the
/// exact methods' tests.  Deterministic for a fixed (seed, shard) layout and
/// independent of thread count (integer reduction over counter-keyed shards).
ProbEstimate mc_all_classes(const ClassDistribution& dist, std::int64_t draws,
                            std::int64_t trials, std::uint64_t seed, int threads = 0);

/// log C(n, k) via lgamma.
double log_choose(std::int64_t n, std::int64_t k);

}  // namespace negbound
