#include "negbound/prob.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "negbound/error.hpp"
#include "negbound/parallel.hpp"
#include "negbound/rng.hpp"

namespace negbound {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr double kUniformTolerance = 1e-12;
constexpr double kCrossCheckTolerance = 1e-10;
constexpr double kMaxDigitsLost = 6.0;

}  // namespace

ClassDistribution::ClassDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::invalid_argument("ClassDistribution: need at least one class");
    double lo = 1.0, hi = 0.0;
    KahanSum total;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        const double p = probs_[i];
        if (!(p > 0.0) || p > 1.0) {
            std::ostringstream os;
            os << "ClassDistribution: entry " << i << " = " << p << " outside (0, 1]";
            throw std::invalid_argument(os.str());
        }
        lo = std::min(lo, p);
        hi = std::max(hi, p);
        total.add(p);
    }
    if (std::abs(total.value() - 1.0) > kSumTolerance) {
        std::ostringstream os;
        os << "ClassDistribution: entries sum to " << total.value() << ", not 1";
        throw std::invalid_argument(os.str());
    }
    uniform_ = (hi - lo) <= kUniformTolerance;
    min_prob_ = lo;
}

ClassDistribution ClassDistribution::uniform(int n_classes) {
    if (n_classes < 1) throw std::invalid_argument("uniform: n_classes must be >= 1");
    return ClassDistribution(std::vector<double>(static_cast<std::size_t>(n_classes),
                                                 1.0 / static_cast<double>(n_classes)));
}

std::string_view to_string(ProbMethod m) {
    switch (m) {
        case ProbMethod::closed_form: return "closed_form";
        case ProbMethod::dp: return "dp";
        case ProbMethod::inclusion_exclusion: return "inclusion_exclusion";
        case ProbMethod::quadrature: return "quadrature";
        case ProbMethod::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

double log_choose(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
           std::lgamma(static_cast<double>(n - k + 1));
}

ProbEstimate collision_probability(const ClassDistribution& dist, std::int64_t k) {
    if (k < 0) throw std::invalid_argument("collision_probability: k must be >= 0");
    if (k == 0) return {0.0, 0.0, ProbMethod::closed_form};
    // 1 - sum_c rho(c)(1-rho(c))^k.  The sum is of same-signed terms, so a
    // compensated accumulator suffices.
    KahanSum miss;
    for (double p : dist.probs()) {
        miss.add(p * std::exp(static_cast<double>(k) * std::log1p(-p)));
    }
    return {1.0 - miss.value(), 0.0, ProbMethod::closed_form};
}

namespace {

/// DP over the number of distinct classes collected so far.  Every state is
/// a probability in [0,1]; no cancellation anywhere.
double coverage_dp_uniform(int n_classes, std::int64_t draws) {
    const double c = static_cast<double>(n_classes);
    std::vector<double> state(static_cast<std::size_t>(n_classes) + 1, 0.0);
    state[0] = 1.0;
    for (std::int64_t d = 0; d < draws; ++d) {
        for (int s = n_classes; s >= 1; --s) {
            state[s] = state[s] * (static_cast<double>(s) / c) +
                       state[s - 1] * (static_cast<double>(n_classes - s + 1) / c);
        }
        state[0] = 0.0;
    }
    return state[static_cast<std::size_t>(n_classes)];
}

struct IeResult {
    double value = 0.0;
    double digits_lost = 0.0;
};

/// Alternating-series coverage probability for a uniform distribution,
/// with binomials in log space and sorted compensated recombination.
IeResult coverage_ie_uniform(int n_classes, std::int64_t draws) {
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(n_classes) + 1);
    double magnitude = 0.0;
    for (int m = 0; m <= n_classes; ++m) {
        if (m == n_classes) continue;  // (1 - m/C)^draws = 0 for draws >= 1
        const double log_term =
            log_choose(n_classes, m) +
            static_cast<double>(draws) *
                std::log(static_cast<double>(n_classes - m) / static_cast<double>(n_classes));
        const double t = ((m % 2) == 0 ? 1.0 : -1.0) * std::exp(log_term);
        terms.push_back(t);
        magnitude += std::abs(t);
    }
    IeResult r;
    r.value = sorted_compensated_sum(std::move(terms));
    r.digits_lost = (r.value > 0.0) ? std::log10(magnitude / r.value)
                                    : std::numeric_limits<double>::infinity();
    return r;
}

/// Subset inclusion-exclusion for a non-uniform distribution:
/// P(cover) = sum_{S subseteq C} (-1)^{|S|} (1 - rho(S))^draws.
/// Gray-code subset walk keeps the rho(S) update O(1) per subset.
IeResult coverage_ie_subsets(const std::vector<double>& probs, std::int64_t draws) {
    const int c = static_cast<int>(probs.size());
    const std::uint64_t n_subsets = std::uint64_t{1} << c;
    std::vector<double> terms;
    terms.reserve(n_subsets);
    double subset_mass = 0.0;
    int bits = 0;
    std::uint64_t gray_prev = 0;
    double magnitude = 0.0;
    for (std::uint64_t i = 0; i < n_subsets; ++i) {
        const std::uint64_t gray = i ^ (i >> 1);
        if (i > 0) {
            const std::uint64_t changed = gray ^ gray_prev;
            const int bit = std::countr_zero(changed);
            if (gray & changed) {
                subset_mass += probs[static_cast<std::size_t>(bit)];
                ++bits;
            } else {
                subset_mass -= probs[static_cast<std::size_t>(bit)];
                --bits;
            }
        }
        gray_prev = gray;
        const double miss = std::max(0.0, 1.0 - subset_mass);
        const double t = ((bits % 2) == 0 ? 1.0 : -1.0) *
                         std::exp(static_cast<double>(draws) * std::log(miss));
        terms.push_back(t);
        magnitude += std::abs(t);
    }
    IeResult r;
    r.value = sorted_compensated_sum(std::move(terms));
    r.digits_lost = (r.value > 0.0) ? std::log10(magnitude / r.value)
                                    : std::numeric_limits<double>::infinity();
    return r;
}

void throw_cancellation(double digits_lost) {
    std::ostringstream os;
    os << "all_classes_probability: inclusion-exclusion lost " << digits_lost
       << " decimal digits to cancellation and no DP route is available; "
          "use the Monte-Carlo method";
    throw NumericError(os.str());
}

}  // namespace

ProbEstimate all_classes_probability(const ClassDistribution& dist, std::int64_t draws,
                                     const CoverageOptions& opts) {
    if (draws < 0) throw std::invalid_argument("all_classes_probability: draws must be >= 0");
    if (opts.method == CoverageMethod::monte_carlo) {
        return mc_all_classes(dist, draws, opts.mc_trials, opts.mc_seed, opts.threads);
    }
    const int c = dist.size();
    if (draws < c) {
        // Pigeonhole; also sidesteps the 0^0 corner of the alternating sums.
        const ProbMethod m = (opts.method == CoverageMethod::inclusion_exclusion)
                                 ? ProbMethod::inclusion_exclusion
                                 : ProbMethod::dp;
        return {0.0, 0.0, m};
    }

    if (dist.is_uniform()) {
        if (opts.method == CoverageMethod::inclusion_exclusion) {
            const IeResult ie = coverage_ie_uniform(c, draws);
            if (ie.digits_lost > kMaxDigitsLost) throw_cancellation(ie.digits_lost);
            return {ie.value, 0.0, ProbMethod::inclusion_exclusion};
        }
        const double dp = coverage_dp_uniform(c, draws);
        if (opts.method == CoverageMethod::automatic) {
            const IeResult ie = coverage_ie_uniform(c, draws);
            if (ie.digits_lost <= kMaxDigitsLost &&
                std::abs(ie.value - dp) > kCrossCheckTolerance) {
                std::ostringstream os;
                os << "all_classes_probability: DP (" << dp << ") and inclusion-exclusion ("
                   << ie.value << ") disagree beyond 1e-10";
                throw NumericError(os.str());
            }
        }
        return {dp, 0.0, ProbMethod::dp};
    }

    // Non-uniform: exact subset route up to 20 classes, Monte-Carlo beyond.
    if (opts.method == CoverageMethod::dp && c > 20) {
        throw NumericError("all_classes_probability: exact non-uniform route needs |C| <= 20");
    }
    if (c <= 20) {
        const IeResult ie = coverage_ie_subsets(dist.probs(), draws);
        if (ie.digits_lost > kMaxDigitsLost) throw_cancellation(ie.digits_lost);
        return {ie.value, 0.0, ProbMethod::inclusion_exclusion};
    }
    return mc_all_classes(dist, draws, opts.mc_trials, opts.mc_seed, opts.threads);
}

double coupon_pmf(const ClassDistribution& dist, std::int64_t n) {
    if (n < 1) throw std::invalid_argument("coupon_pmf: n must be >= 1");
    if (!dist.is_uniform()) throw std::invalid_argument("coupon_pmf: distribution must be uniform");
    const int c = dist.size();
    if (c == 1) return n == 1 ? 1.0 : 0.0;
    if (n == 1) return 0.0;  // the last term would be 0^0; T >= |C| anyway
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(c));
    for (int m = 0; m < c; ++m) {
        const double base = 1.0 - static_cast<double>(m + 1) / static_cast<double>(c);
        if (base == 0.0) continue;
        const double log_term =
            log_choose(c - 1, m) + static_cast<double>(n - 1) * std::log(base);
        terms.push_back(((m % 2) == 0 ? 1.0 : -1.0) * std::exp(log_term));
    }
    return sorted_compensated_sum(std::move(terms));
}

ExpectedDraws expected_draws(const ClassDistribution& dist) {
    // Substitute u = e^{-x/s}, s = 1/min_c rho(c):
    //   E = int_0^1 (1 - prod_c [1 - u^{rho(c) s}]) * (s/u) du.
    // Every exponent rho(c)*s >= 1, so the integrand is bounded on (0, 1].
    const double s = 1.0 / dist.min_prob();
    std::vector<double> exponents;
    exponents.reserve(dist.probs().size());
    for (double p : dist.probs()) exponents.push_back(p * s);

    const auto integrand = [&](double u) -> double {
        if (u <= 0.0) {
            double limit = 0.0;
            for (double a : exponents) {
                if (a <= 1.0) limit += s;
            }
            return limit;
        }
        const double log_u = std::log(u);
        double log_prod = 0.0;
        for (double a : exponents) {
            const double ua = std::exp(a * log_u);
            log_prod += std::log1p(-ua);
        }
        return -std::expm1(log_prod) * (s / u);
    };

    double error_estimate = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        integrand, 0.0, 1.0, 22, 1e-13, &error_estimate);

    const double abs_tolerance = 1e-8 * std::max(1.0, std::abs(value));
    if (!(error_estimate <= abs_tolerance) || !std::isfinite(value)) {
        std::ostringstream os;
        os << "expected_draws: quadrature did not converge; achieved error " << error_estimate
           << " against tolerance " << abs_tolerance;
        throw NumericError(os.str());
    }

    if (dist.is_uniform()) {
        const int c = dist.size();
        KahanSum harmonic;
        for (int i = 1; i <= c; ++i) harmonic.add(1.0 / static_cast<double>(i));
        const double closed = static_cast<double>(c) * harmonic.value();
        if (std::abs(value - closed) > 1e-6) {
            std::ostringstream os;
            os << "expected_draws: quadrature " << value << " disagrees with closed form "
               << closed << " beyond 1e-6";
            throw NumericError(os.str());
        }
    }

    ExpectedDraws r;
    r.value = value;
    r.ceil_value = std::ceil(value);
    r.abs_error = error_estimate;
    return r;
}

ProbEstimate mc_all_classes(const ClassDistribution& dist, std::int64_t draws,
                            std::int64_t trials, std::uint64_t seed, int threads) {
    if (trials < 1) throw std::invalid_argument("mc_all_classes: trials must be >= 1");
    if (draws < 0) throw std::invalid_argument("mc_all_classes: draws must be >= 0");
    const int c = dist.size();
    if (draws < c) return {0.0, 0.0, ProbMethod::monte_carlo};

    // Per-trial streams keyed by trial index make the integer reduction
    // order-independent: identical output for any thread count.
    const bool uniform = dist.is_uniform();
    std::vector<double> cdf;
    if (!uniform) {
        cdf.reserve(dist.probs().size());
        double acc = 0.0;
        for (double p : dist.probs()) {
            acc += p;
            cdf.push_back(acc);
        }
        cdf.back() = 1.0;
    }

    const int n_shards = 256;
    std::vector<std::int64_t> shard_hits(n_shards, 0);
    parallel_for(n_shards, threads, [&](std::int64_t shard) {
        const std::int64_t lo = trials * shard / n_shards;
        const std::int64_t hi = trials * (shard + 1) / n_shards;
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(c));
        std::int64_t hits = 0;
        for (std::int64_t t = lo; t < hi; ++t) {
            CounterRng rng(seed, "mc_all_classes", static_cast<std::uint64_t>(t));
            std::fill(seen.begin(), seen.end(), 0);
            int distinct = 0;
            for (std::int64_t d = 0; d < draws; ++d) {
                int cls;
                if (uniform) {
                    cls = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(c)));
                } else {
                    const double u = rng.uniform01();
                    cls = static_cast<int>(
                        std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
                    if (cls >= c) cls = c - 1;
                }
                if (!seen[static_cast<std::size_t>(cls)]) {
                    seen[static_cast<std::size_t>(cls)] = 1;
                    if (++distinct == c) {
                        ++hits;
                        break;
                    }
                }
            }
        }
        shard_hits[static_cast<std::size_t>(shard)] = hits;
    });

    std::int64_t hits = 0;
    for (std::int64_t h : shard_hits) hits += h;
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    return {p, se, ProbMethod::monte_carlo};
}

}  // namespace negbound
