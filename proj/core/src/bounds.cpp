#include "negbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "negbound/parallel.hpp"

namespace negbound {

namespace {

constexpr double kZeroCoefficient = 1e-15;
constexpr double kInfiniteDenominator = 1e-12;

}  // namespace

CollisionStats collision_stats(int anchor_class, std::span<const int> negative_classes,
                               int n_classes) {
    CollisionStats s;
    std::vector<bool> seen(static_cast<std::size_t>(n_classes), false);
    auto mark = [&](int c) {
        if (c < 0 || c >= n_classes) {
            throw std::invalid_argument("collision_stats: class id outside [0, n_classes)");
        }
        seen[static_cast<std::size_t>(c)] = true;
    };
    mark(anchor_class);
    for (int c : negative_classes) {
        mark(c);
        if (c == anchor_class) ++s.col;
    }
    for (int c = 0; c < n_classes; ++c) {
        if (seen[static_cast<std::size_t>(c)]) s.c_sub.push_back(c);
    }
    s.covers_all = static_cast<int>(s.c_sub.size()) == n_classes;
    return s;
}

namespace {

/// E[ln(Col+1)] for Col | anchor c ~ Binomial(k, rho(c)), mixed over c.
/// Exact; the pmf recurrence never leaves [0, 1].
double exact_expected_log_col1(const ClassDistribution& rho, std::int64_t k) {
    KahanSum total;
    for (double p : rho.probs()) {
        if (p >= 1.0) {
            total.add(std::log(static_cast<double>(k) + 1.0));
            continue;
        }
        double pmf = std::exp(static_cast<double>(k) * std::log1p(-p));
        KahanSum inner;
        for (std::int64_t j = 0; j < k; ++j) {
            // inner starts at j=1: ln(0+1) contributes nothing
            pmf *= (static_cast<double>(k - j) / static_cast<double>(j + 1)) * (p / (1.0 - p));
            inner.add(pmf * std::log(static_cast<double>(j) + 2.0));
        }
        total.add(p * inner.value());
    }
    return total.value();
}

/// Exact P(C_sub = C | Col = 0) for uniform rho: conditioned on avoiding the
/// anchor class, the k negatives are uniform over the other |C|-1 classes.
double uniform_cover_given_nocol(int n_classes, std::int64_t k) {
    if (n_classes == 1) return 0.0;  // Col = 0 impossible; coefficient (1-tau) is 0 anyway
    if (n_classes == 2) return k >= 1 ? 1.0 : 0.0;
    return all_classes_probability(ClassDistribution::uniform(n_classes - 1), k).value;
}

/// Joint Monte-Carlo over rho alone for the non-uniform conditionals.
void mc_class_probs(const ClassDistribution& rho, std::int64_t k, int extra_draws,
                    const ClassProbOptions& opts, ClassLevelProbs* out) {
    const int c = rho.size();
    std::vector<double> cdf;
    double acc = 0.0;
    for (double p : rho.probs()) {
        acc += p;
        cdf.push_back(acc);
    }
    cdf.back() = 1.0;
    auto draw = [&](CounterRng& rng) {
        const double u = rng.uniform01();
        int cls = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        return cls < c ? cls : c - 1;
    };

    const int n_shards = 256;
    struct Shard {
        std::int64_t nocol = 0;
        std::int64_t nocol_cover = 0;
        std::int64_t cover = 0;
    };
    std::vector<Shard> shards(n_shards);
    const std::int64_t trials = opts.mc_draws;
    parallel_for(n_shards, opts.threads, [&](std::int64_t shard) {
        const std::int64_t lo = trials * shard / n_shards;
        const std::int64_t hi = trials * (shard + 1) / n_shards;
        Shard s;
        std::vector<std::uint8_t> seen(static_cast<std::size_t>(c));
        for (std::int64_t t = lo; t < hi; ++t) {
            CounterRng rng(opts.mc_seed, "class_probs_mc", static_cast<std::uint64_t>(t));
            std::fill(seen.begin(), seen.end(), 0);
            const int anchor = draw(rng);
            seen[static_cast<std::size_t>(anchor)] = 1;
            int distinct = 1;
            int col = 0;
            // K negatives plus (extra_draws - 1) further draws for the
            // covers-all event's K+extra convention.
            const std::int64_t total_draws = k + extra_draws - 1;
            for (std::int64_t d = 0; d < total_draws; ++d) {
                const int cls = draw(rng);
                if (d < k && cls == anchor) ++col;
                if (!seen[static_cast<std::size_t>(cls)]) {
                    seen[static_cast<std::size_t>(cls)] = 1;
                    ++distinct;
                }
            }
            const bool covered = distinct == c;
            if (covered) ++s.cover;
            if (col == 0) {
                ++s.nocol;
                // cover-given-nocol uses the K+1 ids {c} u negs only
                if (extra_draws == 1 && covered) ++s.nocol_cover;
            }
        }
        shards[static_cast<std::size_t>(shard)] = s;
    });

    std::int64_t nocol = 0, nocol_cover = 0, cover = 0;
    for (const Shard& s : shards) {
        nocol += s.nocol;
        nocol_cover += s.nocol_cover;
        cover += s.cover;
    }
    out->upsilon = static_cast<double>(cover) / static_cast<double>(trials);
    out->p_cover_given_nocol =
        nocol > 0 ? static_cast<double>(nocol_cover) / static_cast<double>(nocol) : 0.0;
    out->coverage_method = ProbMethod::monte_carlo;
}

}  // namespace

ClassLevelProbs class_level_probs(const ClassDistribution& rho, std::int64_t k,
                                  const ClassProbOptions& opts) {
    if (k < 1) throw std::invalid_argument("class_level_probs: k must be >= 1");
    ClassLevelProbs out;
    out.tau = collision_probability(rho, k).value;
    out.expected_log_col1 = exact_expected_log_col1(rho, k);

    const int c = rho.size();
    if (rho.is_uniform()) {
        out.upsilon = all_classes_probability(rho, k + opts.extra_draws).value;
        out.p_cover_given_nocol = uniform_cover_given_nocol(c, k);
        out.coverage_method = ProbMethod::dp;
        return out;
    }
    if (c <= 20) {
        out.upsilon = all_classes_probability(rho, k + opts.extra_draws).value;
        // Condition on the anchor class, then cover the rest with negatives
        // drawn from rho restricted away from it.
        KahanSum nocol_mass, cover_mass;
        for (int a = 0; a < c; ++a) {
            const double pa = rho.probs()[static_cast<std::size_t>(a)];
            const double miss = pa * std::exp(static_cast<double>(k) * std::log1p(-pa));
            nocol_mass.add(miss);
            if (c >= 2) {
                std::vector<double> rest;
                rest.reserve(static_cast<std::size_t>(c) - 1);
                for (int b = 0; b < c; ++b) {
                    if (b != a) rest.push_back(rho.probs()[static_cast<std::size_t>(b)] / (1.0 - pa));
                }
                const double cover =
                    all_classes_probability(ClassDistribution(std::move(rest)), k).value;
                cover_mass.add(miss * cover);
            }
        }
        out.p_cover_given_nocol =
            nocol_mass.value() > 0.0 ? cover_mass.value() / nocol_mass.value() : 0.0;
        out.coverage_method = ProbMethod::inclusion_exclusion;
        return out;
    }
    mc_class_probs(rho, k, opts.extra_draws, opts, &out);
    return out;
}

double BoundTerms::total_std_error() const {
    const double s1 = sup.std_error();
    const double s2 = sub.std_error();
    const double s3 = collision.std_error();
    const double s4 = d_f.std_error;
    return std::sqrt(s1 * s1 + s2 * s2 + s3 * s3 + s4 * s4);
}

namespace {

/// Per-batch scores shared by L_info and both bound decompositions.
struct BatchScores {
    std::vector<double> l_info;     // InfoNCE on the actual vectors
    std::vector<double> lsub_own;   // l_sub(z, c, C_sub)
    std::vector<double> lsub_full;  // l_sub(z, c, C)
    std::vector<double> log_col1;   // ln(Col + 1)
    std::vector<std::uint8_t> no_collision;
    std::vector<std::uint8_t> covers;  // covers-all event over K+extra draws
};

BatchScores score_batches(const EmbeddingSet& set, const MeanRepresentations& means,
                          const ClassDistribution& rho, const AugmentationSpec& spec,
                          std::int64_t k, const EvalOptions& opts, const CounterRng& rng) {
    const std::int64_t n = opts.n_batches;
    if (n < 1) throw std::invalid_argument("bound evaluation: n_batches must be >= 1");
    if (means.class_means.rows != set.n_classes) {
        throw std::invalid_argument("bound evaluation: class means do not match n_classes");
    }

    std::vector<int> all_classes(static_cast<std::size_t>(set.n_classes));
    for (int c = 0; c < set.n_classes; ++c) all_classes[static_cast<std::size_t>(c)] = c;

    BatchScores s;
    s.l_info.resize(static_cast<std::size_t>(n));
    s.lsub_own.resize(static_cast<std::size_t>(n));
    s.lsub_full.resize(static_cast<std::size_t>(n));
    s.log_col1.resize(static_cast<std::size_t>(n));
    s.no_collision.resize(static_cast<std::size_t>(n));
    s.covers.resize(static_cast<std::size_t>(n));

    const ClassRowIndex index = build_class_index(set);
    parallel_for(n, opts.threads, [&](std::int64_t i) {
        CounterRng batch_rng = rng.fork("bound_batches", static_cast<std::uint64_t>(i));
        const ContrastiveBatch b = sample_batch(set, index, rho, spec, k, batch_rng);

        std::vector<double> logits(static_cast<std::size_t>(k) + 1);
        logits[0] = dot(b.anchor, b.positive) / opts.temperature;
        for (std::int64_t j = 0; j < k; ++j) {
            logits[static_cast<std::size_t>(j) + 1] =
                dot(std::span<const float>(b.anchor), b.negatives.row(j)) / opts.temperature;
        }
        s.l_info[static_cast<std::size_t>(i)] = info_nce_logits(logits);

        CollisionStats stats =
            collision_stats(b.anchor_class, b.negative_classes, set.n_classes);
        // The covers-all convention may ask for extra class draws beyond the
        // K+1 already in the batch.
        bool covered = stats.covers_all;
        if (!covered && opts.extra_draws > 1) {
            std::vector<int> extended = b.negative_classes;
            for (int e = 1; e < opts.extra_draws; ++e) {
                const double u = batch_rng.uniform01();
                double acc = 0.0;
                int cls = set.n_classes - 1;
                for (int c = 0; c < set.n_classes; ++c) {
                    acc += rho.probs()[static_cast<std::size_t>(c)];
                    if (u < acc) {
                        cls = c;
                        break;
                    }
                }
                extended.push_back(cls);
            }
            covered = collision_stats(b.anchor_class, extended, set.n_classes).covers_all;
        }

        s.no_collision[static_cast<std::size_t>(i)] = stats.col == 0 ? 1 : 0;
        s.covers[static_cast<std::size_t>(i)] = covered ? 1 : 0;
        s.log_col1[static_cast<std::size_t>(i)] = std::log(static_cast<double>(stats.col) + 1.0);
        s.lsub_own[static_cast<std::size_t>(i)] = sub_class_loss(
            b.anchor, b.anchor_class, stats.c_sub, means.class_means, opts.temperature);
        s.lsub_full[static_cast<std::size_t>(i)] =
            covered && opts.extra_draws == 1
                ? s.lsub_own[static_cast<std::size_t>(i)]
                : sub_class_loss(b.anchor, b.anchor_class, all_classes, means.class_means,
                                 opts.temperature);
    });
    return s;
}

BoundTerm make_term(double coefficient, const std::vector<double>& values, double temperature,
                    bool* partial) {
    BoundTerm t;
    t.coefficient = coefficient;
    if (values.empty()) {
        if (coefficient > kZeroCoefficient) {
            t.present = false;
            *partial = true;
        } else {
            t.present = true;  // exactly-zero coefficient: the term is exactly zero
        }
        t.conditional = {0.0, 0.0, 0, temperature};
        return t;
    }
    const MeanStderr ms = mean_stderr(values);
    t.conditional = {ms.mean, ms.std_error, ms.n, temperature};
    return t;
}

std::vector<double> select(const std::vector<double>& values,
                           const std::function<bool(std::size_t)>& keep) {
    std::vector<double> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (keep(i)) out.push_back(values[i]);
    }
    return out;
}

BoundTerms curl_terms_from_scores(const BatchScores& s, const ClassLevelProbs& p,
                                  const LossEstimate& d_f, double t) {
    BoundTerms out;
    out.d_f = d_f;
    const auto& nc = s.no_collision;
    const auto& cov = s.covers;
    out.sup = make_term(
        (1.0 - p.tau) * p.p_cover_given_nocol,
        select(s.lsub_full, [&](std::size_t i) { return nc[i] && cov[i]; }), t, &out.partial);
    out.sub = make_term(
        (1.0 - p.tau) * (1.0 - p.p_cover_given_nocol),
        select(s.lsub_own, [&](std::size_t i) { return nc[i] && !cov[i]; }), t, &out.partial);
    out.collision = make_term(
        p.tau, select(s.log_col1, [&](std::size_t i) { return !nc[i]; }), t, &out.partial);
    return out;
}

BoundTerms proposed_terms_from_scores(const BatchScores& s, const ClassLevelProbs& p,
                                      const LossEstimate& d_f, double t) {
    BoundTerms out;
    out.d_f = d_f;
    const auto& cov = s.covers;
    out.sup = make_term(0.5 * p.upsilon,
                        select(s.lsub_full, [&](std::size_t i) { return cov[i] != 0; }), t,
                        &out.partial);
    out.sub = make_term(0.5 * (1.0 - p.upsilon),
                        select(s.lsub_own, [&](std::size_t i) { return cov[i] == 0; }), t,
                        &out.partial);
    out.collision = make_term(0.5, s.log_col1, t, &out.partial);
    return out;
}

}  // namespace

BoundTerms evaluate_curl_bound(const EmbeddingSet& set, const MeanRepresentations& means,
                               const AugmentationSpec& spec, std::int64_t k,
                               const EvalOptions& opts, CounterRng rng,
                               const ClassDistribution* rho) {
    const ClassDistribution dist = rho ? *rho : empirical_distribution(set);
    ClassProbOptions popts;
    popts.threads = opts.threads;
    popts.extra_draws = opts.extra_draws;
    const ClassLevelProbs p = class_level_probs(dist, k, popts);
    const BatchScores s = score_batches(set, means, dist, spec, k, opts, rng);
    const LossEstimate d = gap_term(set, means, opts.temperature);
    return curl_terms_from_scores(s, p, d, opts.temperature);
}

BoundTerms evaluate_proposed_bound(const EmbeddingSet& set, const MeanRepresentations& means,
                                   const AugmentationSpec& spec, std::int64_t k,
                                   const EvalOptions& opts, CounterRng rng,
                                   const ClassDistribution* rho) {
    const ClassDistribution dist = rho ? *rho : empirical_distribution(set);
    ClassProbOptions popts;
    popts.threads = opts.threads;
    popts.extra_draws = opts.extra_draws;
    const ClassLevelProbs p = class_level_probs(dist, k, popts);
    const BatchScores s = score_batches(set, means, dist, spec, k, opts, rng);
    const LossEstimate d = gap_term(set, means, opts.temperature);
    return proposed_terms_from_scores(s, p, d, opts.temperature);
}

LossEstimate collision_upper_bound(const EmbeddingSet& set, const AugmentationSpec& spec,
                                   CounterRng rng, int threads, int* singleton_classes) {
    const std::int64_t n = set.size();
    bool any_pair = false;
    int singletons = 0;
    for (std::int64_t c : set.class_counts) {
        if (c >= 2) any_pair = true;
        if (c == 1) ++singletons;
    }
    if (!any_pair) {
        throw std::invalid_argument("collision_upper_bound: no class has two samples");
    }
    if (singleton_classes) *singleton_classes = singletons;

    const std::int64_t h = set.dim();
    Matrix z(n, h), z_plus(n, h);
    parallel_for(n, threads, [&](std::int64_t i) {
        CounterRng sample_rng = rng.fork("eq16", static_cast<std::uint64_t>(i));
        const auto a = apply_augmentation(set.features.row(i), spec, sample_rng);
        const auto b = apply_augmentation(set.features.row(i), spec, sample_rng);
        std::copy(a.begin(), a.end(), z.row(i).begin());
        std::copy(b.begin(), b.end(), z_plus.row(i).begin());
    });

    const ClassRowIndex index = build_class_index(set);
    std::vector<double> per_sample(static_cast<std::size_t>(n), 0.0);
    parallel_for(n, threads, [&](std::int64_t i) {
        const int y = set.labels[static_cast<std::size_t>(i)];
        const auto& same = index.rows[static_cast<std::size_t>(y)];
        const double anchored = dot(z.row(i), z_plus.row(i));
        KahanSum inner;
        for (std::int64_t j : same) {
            if (j == i) continue;
            inner.add(std::abs(dot(z.row(i), z.row(j)) - anchored));
        }
        per_sample[static_cast<std::size_t>(i)] =
            inner.value() / static_cast<double>(set.class_counts[static_cast<std::size_t>(y)]);
    });

    const MeanStderr ms = mean_stderr(per_sample);
    return {ms.mean, ms.std_error, ms.n, 1.0};
}

SupUpperBound sup_upper_bound(const BoundReport& r, BoundVariant variant) {
    SupUpperBound out;
    if (variant == BoundVariant::proposed) {
        const double denom = r.probs.upsilon;
        if (denom < kInfiniteDenominator) return out;
        const double e_log_col1 = r.proposed.collision.conditional.value;  // unconditional mean
        const double numer = 2.0 * (r.l_info.value - r.d_f.value) -
                             (1.0 - r.probs.upsilon) * r.proposed.sub.conditional.value -
                             e_log_col1;
        out.value = numer / denom;
        out.flagged_infinite = false;
        return out;
    }
    const double denom = (1.0 - r.probs.tau) * r.probs.p_cover_given_nocol;
    if (denom < kInfiniteDenominator) return out;
    const double numer = r.l_info.value - r.d_f.value -
                         r.probs.tau * r.curl.collision.conditional.value -
                         (1.0 - r.probs.tau) * (1.0 - r.probs.p_cover_given_nocol) *
                             r.curl.sub.conditional.value;
    out.value = numer / denom;
    out.flagged_infinite = false;
    return out;
}

BoundReport evaluate_bound_report(const ReportInputs& in, const AugmentationSpec& spec,
                                  std::int64_t k, const EvalOptions& opts, CounterRng rng) {
    if (!in.eval_set || !in.means) {
        throw std::invalid_argument("evaluate_bound_report: eval_set and means are required");
    }
    const EmbeddingSet& set = *in.eval_set;
    const ClassDistribution dist = in.rho ? *in.rho : empirical_distribution(set);

    ClassProbOptions popts;
    popts.threads = opts.threads;
    popts.extra_draws = opts.extra_draws;

    BoundReport r;
    r.k_plus_1 = k + 1;
    r.temperature = opts.temperature;
    r.n_batches = opts.n_batches;
    r.probs = class_level_probs(dist, k, popts);
    r.d_f = gap_term(set, *in.means, opts.temperature);

    const BatchScores scores = score_batches(set, *in.means, dist, spec, k, opts, rng);
    const MeanStderr l_info = mean_stderr(scores.l_info);
    r.l_info = {l_info.mean, l_info.std_error, l_info.n, opts.temperature};
    r.curl = curl_terms_from_scores(scores, r.probs, r.d_f, opts.temperature);
    r.proposed = proposed_terms_from_scores(scores, r.probs, r.d_f, opts.temperature);

    const EmbeddingSet& col_set = in.collision_set ? *in.collision_set : set;
    r.collision_bound =
        collision_upper_bound(col_set, spec, rng.fork("collision_bound"), opts.threads);

    r.mean_acc = in.mean_acc;
    r.probe_acc = in.probe_acc;
    r.sup_ub_curl = sup_upper_bound(r, BoundVariant::curl);
    r.sup_ub_proposed = sup_upper_bound(r, BoundVariant::proposed);

    std::ostringstream note;
    if (r.curl.partial || r.proposed.partial) {
        note << "partial: a conditional slice with positive coefficient received no batches; ";
    }
    if (r.probs.upsilon < kInfiniteDenominator) {
        note << "upsilon is 0 at K+1=" << r.k_plus_1
             << " (fewer draws than classes): proposed rearrangement flagged infinite; ";
    }
    r.note = note.str();
    return r;
}

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fmt_term(const BoundTerm& t) {
    return t.present ? fmt(t.value()) : "nan";
}

double term_total_or_nan(const BoundTerms& t) {
    if (t.partial) return std::numeric_limits<double>::quiet_NaN();
    return t.total();
}

nlohmann::json loss_json(const LossEstimate& e) {
    return {{"value", e.value},
            {"stderr", e.std_error},
            {"n_samples", e.n_samples},
            {"temperature", e.temperature}};
}

nlohmann::json term_json(const BoundTerm& t) {
    return {{"coefficient", t.coefficient},
            {"present", t.present},
            {"conditional", loss_json(t.conditional)},
            {"value", t.present ? t.value() : std::numeric_limits<double>::quiet_NaN()}};
}

nlohmann::json sup_json(const SupUpperBound& s) {
    if (s.flagged_infinite) return {{"flagged_infinite", true}};
    return {{"flagged_infinite", false}, {"value", s.value}};
}

}  // namespace

std::string bound_report_csv_header() {
    return "k_plus_1,tau,upsilon,mu_acc,linear_acc,L_info,d_f,curl_total,curl_collision,"
           "curl_sup,curl_sub,prop_total,prop_sup,prop_sub,collision_bound,sup_ub_curl,"
           "sup_ub_proposed";
}

std::string bound_report_csv_row(const BoundReport& r) {
    std::ostringstream os;
    os << r.k_plus_1 << ',' << fmt(r.probs.tau) << ',' << fmt(r.probs.upsilon) << ','
       << fmt(r.mean_acc) << ',' << fmt(r.probe_acc) << ',' << fmt(r.l_info.value) << ','
       << fmt(r.d_f.value) << ',' << fmt(term_total_or_nan(r.curl)) << ','
       << fmt_term(r.curl.collision) << ',' << fmt_term(r.curl.sup) << ','
       << fmt_term(r.curl.sub) << ',' << fmt(term_total_or_nan(r.proposed)) << ','
       << fmt_term(r.proposed.sup) << ',' << fmt_term(r.proposed.sub) << ','
       << fmt(r.collision_bound.value) << ','
       << (r.sup_ub_curl.flagged_infinite ? "inf" : fmt(r.sup_ub_curl.value)) << ','
       << (r.sup_ub_proposed.flagged_infinite ? "inf" : fmt(r.sup_ub_proposed.value));
    return os.str();
}

std::string bound_reports_json(const std::vector<BoundReport>& reports) {
    nlohmann::json rows = nlohmann::json::array();
    for (const BoundReport& r : reports) {
        nlohmann::json j = {
            {"k_plus_1", r.k_plus_1},
            {"temperature", r.temperature},
            {"n_batches", r.n_batches},
            {"tau", r.probs.tau},
            {"upsilon", r.probs.upsilon},
            {"p_cover_given_nocol", r.probs.p_cover_given_nocol},
            {"expected_log_col1_exact", r.probs.expected_log_col1},
            {"L_info", loss_json(r.l_info)},
            {"d_f", loss_json(r.d_f)},
            {"curl",
             {{"total", term_total_or_nan(r.curl)},
              {"total_stderr", r.curl.total_std_error()},
              {"partial", r.curl.partial},
              {"sup", term_json(r.curl.sup)},
              {"sub", term_json(r.curl.sub)},
              {"collision", term_json(r.curl.collision)}}},
            {"proposed",
             {{"total", term_total_or_nan(r.proposed)},
              {"total_stderr", r.proposed.total_std_error()},
              {"partial", r.proposed.partial},
              {"sup", term_json(r.proposed.sup)},
              {"sub", term_json(r.proposed.sub)},
              {"collision", term_json(r.proposed.collision)}}},
            {"collision_bound", loss_json(r.collision_bound)},
            {"sup_ub_curl", sup_json(r.sup_ub_curl)},
            {"sup_ub_proposed", sup_json(r.sup_ub_proposed)},
            {"mean_acc", r.mean_acc},
            {"probe_acc", r.probe_acc},
        };
        if (!r.note.empty()) j["note"] = r.note;
        rows.push_back(std::move(j));
    }
    return rows.dump(2);
}

}  // namespace negbound
