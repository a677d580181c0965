// Acceptance suite: checks the numbers this toolkit is contracted to
// reproduce, one [PASS]/[FAIL] line per criterion.  Failures print the
// measured values so the report is self-contained.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "negbound/analysis.hpp"
#include "negbound/bounds.hpp"
#include "negbound/losses.hpp"
#include "negbound/parallel.hpp"
#include "negbound/prob.hpp"
#include "negbound/toytrain.hpp"

using namespace negbound;

namespace {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double seconds = 0.0;
    std::vector<std::string> notes;
};

class Checker {
public:
    explicit Checker(std::vector<std::string>* notes) : notes_(notes) {}

    void require(bool ok, const std::string& what) {
        if (!ok) {
            failed_ = true;
            notes_->push_back("FAILED: " + what);
        }
    }
    void note(const std::string& text) { notes_->push_back(text); }
    bool ok() const { return !failed_; }

private:
    std::vector<std::string>* notes_;
    bool failed_ = false;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: coupon table

// Independent stopping-time oracle: simulate the coupon collection with the
// standard library generator and average the number of draws.
double oracle_expected_draws(const std::vector<double>& probs, std::int64_t trials) {
    std::vector<double> cdf;
    double acc = 0.0;
    for (double p : probs) {
        acc += p;
        cdf.push_back(acc);
    }
    cdf.back() = 1.0;
    const int c = static_cast<int>(probs.size());

    const int n_shards = 256;
    std::vector<std::int64_t> shard_draws(n_shards, 0);
    parallel_for(n_shards, 0, [&](std::int64_t shard) {
        const std::int64_t lo = trials * shard / n_shards;
        const std::int64_t hi = trials * (shard + 1) / n_shards;
        std::int64_t draws = 0;
        for (std::int64_t t = lo; t < hi; ++t) {
            std::mt19937_64 gen(0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(t));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::vector<bool> seen(static_cast<std::size_t>(c), false);
            int distinct = 0;
            while (distinct < c) {
                const double u = unit(gen);
                int cls = 0;
                while (cls + 1 < c && u >= cdf[static_cast<std::size_t>(cls)]) ++cls;
                if (!seen[static_cast<std::size_t>(cls)]) {
                    seen[static_cast<std::size_t>(cls)] = true;
                    ++distinct;
                }
                ++draws;
            }
        }
        shard_draws[static_cast<std::size_t>(shard)] = draws;
    });
    std::int64_t total = 0;
    for (std::int64_t d : shard_draws) total += d;
    return static_cast<double>(total) / static_cast<double>(trials);
}

void criterion_coupon_table(Checker& check) {
    struct Row {
        int classes;
        double raw;
        double ceiled;
    };
    const Row rows[] = {{4, 8.33, 9.0}, {10, 29.29, 30.0}, {100, 518.74, 519.0}};
    for (const Row& row : rows) {
        const auto e = expected_draws(ClassDistribution::uniform(row.classes));
        check.require(std::abs(e.value - row.raw) <= 0.01,
                      "raw E[K+1] for |C|=" + std::to_string(row.classes) + ": got " +
                          fmt(e.value) + ", want " + fmt(row.raw) + " +/- 0.01");
        check.require(e.ceil_value == row.ceiled,
                      "ceil E[K+1] for |C|=" + std::to_string(row.classes));
    }
    check.note("ImageNet row (7709) needs the paper's empirical class frequencies; "
               "substitutes below");

    // substitute 1: uniform |C|=1000 against 1000 * H_1000
    double harmonic = 0.0;
    for (int i = 1; i <= 1000; ++i) harmonic += 1.0 / i;
    const auto e1000 = expected_draws(ClassDistribution::uniform(1000));
    check.require(std::abs(e1000.value - 1000.0 * harmonic) <= 0.01,
                  "uniform |C|=1000: got " + fmt(e1000.value) + ", want " +
                      fmt(1000.0 * harmonic) + " +/- 0.01");

    // substitute 2: synthetic non-uniform rho against the stopping-time oracle
    std::vector<double> probs(8);
    for (int i = 0; i < 8; ++i) probs[static_cast<std::size_t>(i)] = (i + 1) / 36.0;
    const auto quad = expected_draws(ClassDistribution(probs));
    const double oracle = oracle_expected_draws(probs, 1'000'000);
    check.require(std::abs(quad.value - oracle) <= 0.01 * oracle,
                  "non-uniform rho: quadrature " + fmt(quad.value) + " vs MC oracle " +
                      fmt(oracle) + " differ by more than 1%");
    check.note("non-uniform rho: quadrature " + fmt(quad.value) + ", oracle " + fmt(oracle));
}

// ---------------------------------------------------------------------------
// Criterion 2: tau rows

void criterion_tau(Checker& check) {
    const auto u10 = ClassDistribution::uniform(10);
    const auto u100 = ClassDistribution::uniform(100);
    struct Spot {
        const ClassDistribution* dist;
        std::int64_t k_plus_1;
        double want;
    };
    const Spot rows[] = {
        {&u10, 32, 0.96},  {&u10, 128, 1.00},  {&u10, 256, 1.00},  {&u10, 512, 1.00},
        {&u100, 128, 0.72}, {&u100, 256, 0.92}, {&u100, 512, 0.99}, {&u100, 1024, 1.00},
    };
    for (const Spot& s : rows) {
        const double tau = collision_probability(*s.dist, s.k_plus_1 - 1).value;
        check.require(std::abs(tau - s.want) <= 0.005,
                      "tau row |C|=" + std::to_string(s.dist->size()) +
                          ", K+1=" + std::to_string(s.k_plus_1) + ": got " + fmt(tau) +
                          ", want " + fmt(s.want) + " to two decimals");
    }

    // The prose spot value: tau_{K=32} printed as 0.967.  The closed form
    // gives 1 - 0.9^32 = 0.965663, which is 0.00134 away; the assertion is
    // kept as specified and the discrepancy documented.
    const double tau32 = collision_probability(u10, 32).value;
    check.note("closed form tau(k=32) = " + fmt(tau32) + "; paper prose says ~0.967");
    check.require(std::abs(tau32 - 0.967) <= 0.001,
                  "prose spot value tau_{K=32}: got " + fmt(tau32) +
                      ", want 0.967 +/- 0.001 (unreachable from the exact closed form; "
                      "1 - 0.9^32 = 0.965663)");
}

// ---------------------------------------------------------------------------
// Criterion 3: upsilon consistency

void criterion_upsilon(Checker& check) {
    struct Grid {
        int classes;
        std::vector<std::int64_t> draws;
    };
    // Draw grids keep inclusion-exclusion in its numerically healthy regime
    // (the cancellation guard governs elsewhere).
    const Grid grids[] = {
        {4, {4, 8, 16, 32}},
        {10, {10, 20, 40, 80}},
        {100, {400, 500, 600, 800}},
    };
    for (const Grid& g : grids) {
        const auto dist = ClassDistribution::uniform(g.classes);
        for (const std::int64_t draws : g.draws) {
            CoverageOptions dp_opts, ie_opts;
            dp_opts.method = CoverageMethod::dp;
            ie_opts.method = CoverageMethod::inclusion_exclusion;
            const double dp = all_classes_probability(dist, draws, dp_opts).value;
            const double ie = all_classes_probability(dist, draws, ie_opts).value;
            check.require(std::abs(dp - ie) <= 1e-10,
                          "DP vs IE at |C|=" + std::to_string(g.classes) + ", draws=" +
                              std::to_string(draws) + ": " + fmt(dp) + " vs " + fmt(ie));
            const auto mc = mc_all_classes(dist, draws, 1'000'000,
                                           0xC0FFEE ^ static_cast<std::uint64_t>(draws));
            const double slack = 4.0 * std::max(mc.std_error, 1e-7);
            check.require(std::abs(mc.value - dp) <= slack,
                          "MC vs DP at |C|=" + std::to_string(g.classes) + ", draws=" +
                              std::to_string(draws) + ": " + fmt(mc.value) + " vs " + fmt(dp));
        }
    }

    // |C|=10 table rows within +/- 0.03
    const auto u10 = ClassDistribution::uniform(10);
    const double rows10[][2] = {{32, 0.69}, {64, 0.99}, {128, 1.00}, {256, 1.00}, {512, 1.00}};
    for (const auto& row : rows10) {
        const double v = all_classes_probability(u10, static_cast<std::int64_t>(row[0])).value;
        check.require(std::abs(v - row[1]) <= 0.03,
                      "paper upsilon row K+1=" + fmt(row[0]) + ": got " + fmt(v) + ", want " +
                          fmt(row[1]) + " +/- 0.03");
    }

    // |C|=100 rows: documented discrepancy, acceptance is oracle agreement
    const auto u100 = ClassDistribution::uniform(100);
    const double v384 = all_classes_probability(u100, 384).value;
    const double v512 = all_classes_probability(u100, 512).value;
    check.note("DISCREPANCY NOTE: paper table prints upsilon = 0.15 (K+1=384) and 0.62 "
               "(K+1=512) for |C|=100; the independent computation gives " +
               fmt(v384) + " and " + fmt(v512) +
               "; exact methods and the MC oracle agree with each other, not the table");
    const auto mc384 = mc_all_classes(u100, 384, 1'000'000, 21);
    const auto mc512 = mc_all_classes(u100, 512, 1'000'000, 22);
    check.require(std::abs(mc384.value - v384) <= 4.0 * std::max(mc384.std_error, 1e-7),
                  "oracle agreement at |C|=100, draws=384");
    check.require(std::abs(mc512.value - v512) <= 4.0 * std::max(mc512.std_error, 1e-7),
                  "oracle agreement at |C|=100, draws=512");
}

// ---------------------------------------------------------------------------
// Criteria 4-6, 8, 10: the toy sweep

struct SweepCell {
    std::int64_t k_plus_1 = 0;
    std::uint64_t seed = 0;
    BoundReport report;
    std::string csv_row;
    double probe_loss = 0.0;
    double mean_loss = 0.0;
    double final_train_loss = 0.0;
};

TrainConfig sweep_config(std::int64_t k, std::uint64_t seed) {
    TrainConfig config;  // defaults are the documented desk-scale pipeline
    config.k_negatives = k;
    config.seed = seed;
    return config;
}

SweepCell run_sweep_cell(std::int64_t k_plus_1, std::uint64_t seed) {
    SweepCell cell;
    cell.k_plus_1 = k_plus_1;
    cell.seed = seed;
    const TrainConfig config = sweep_config(k_plus_1 - 1, seed);
    const auto data = generate_synthetic(config, CounterRng(config.seed, "synthetic"));
    const auto result = train_encoder(config, data, CounterRng(config.seed, "train"));
    cell.final_train_loss = result.loss_trace.back().value;

    const AugmentationSpec eval_aug{AugmentationKind::gaussian_noise, 0.1, 0.0, true};
    CounterRng eval_rng(config.seed, "acceptance_eval");

    const MeanRepresentations means =
        compute_class_means(result.train_embeddings, eval_aug, 10, eval_rng.fork("means"));

    // criterion 8 inputs: probe vs mean classifier on the training split
    cell.mean_loss = mean_classifier_loss(result.train_embeddings, means, 1.0).value;
    ProbeOptions popts;
    popts.init_from_means = &means;
    const ProbeResult probe = train_linear_probe(result.train_embeddings, popts);
    cell.probe_loss = probe.final_loss.value;

    ReportInputs in;
    in.eval_set = &result.val_embeddings;
    in.collision_set = &result.train_embeddings;
    in.means = &means;
    in.mean_acc = mean_classifier_accuracy(means, result.val_embeddings);
    in.probe_acc = probe_accuracy(probe, result.val_embeddings);

    EvalOptions opts;
    opts.temperature = 1.0;
    opts.n_batches = (result.val_embeddings.size() / k_plus_1) * k_plus_1 * 10;
    cell.report = evaluate_bound_report(in, eval_aug, k_plus_1 - 1, opts,
                                        eval_rng.fork("report"));
    cell.csv_row = bound_report_csv_row(cell.report);
    return cell;
}

void criterion_bound_validity(Checker& check, const std::vector<SweepCell>& cells) {
    for (const SweepCell& c : cells) {
        const auto& r = c.report;
        const double curl_sigma =
            3.0 * std::sqrt(std::pow(r.curl.total_std_error(), 2) +
                            std::pow(r.l_info.std_error, 2));
        const double prop_sigma =
            3.0 * std::sqrt(std::pow(r.proposed.total_std_error(), 2) +
                            std::pow(r.l_info.std_error, 2));
        const std::string tag =
            " (K+1=" + std::to_string(c.k_plus_1) + ", seed=" + std::to_string(c.seed) + ")";
        check.require(r.curl.total() <= r.l_info.value + curl_sigma,
                      "Eq.-8 total " + fmt(r.curl.total()) + " vs L_info " + fmt(r.l_info.value) +
                          tag);
        check.require(r.proposed.total() <= r.l_info.value + prop_sigma,
                      "Eq.-10 total " + fmt(r.proposed.total()) + " vs L_info " +
                          fmt(r.l_info.value) + tag);
        check.require(!r.curl.partial && !r.proposed.partial,
                      "conditional slice went empty" + tag);
    }
}

double mean_over_seeds(const std::vector<SweepCell>& cells, std::int64_t k_plus_1,
                       const std::function<double(const SweepCell&)>& get) {
    double sum = 0.0;
    int n = 0;
    for (const SweepCell& c : cells) {
        if (c.k_plus_1 == k_plus_1) {
            sum += get(c);
            ++n;
        }
    }
    return sum / n;
}

void criterion_figure1(Checker& check, const std::vector<SweepCell>& cells,
                       const std::vector<std::int64_t>& k_values) {
    std::vector<double> curl_ub, prop_ub;
    for (const std::int64_t k1 : k_values) {
        curl_ub.push_back(mean_over_seeds(cells, k1, [](const SweepCell& c) {
            return c.report.sup_ub_curl.flagged_infinite
                       ? std::numeric_limits<double>::infinity()
                       : c.report.sup_ub_curl.value;
        }));
        prop_ub.push_back(mean_over_seeds(cells, k1, [](const SweepCell& c) {
            return c.report.sup_ub_proposed.flagged_infinite
                       ? std::numeric_limits<double>::infinity()
                       : c.report.sup_ub_proposed.value;
        }));
    }
    {
        std::ostringstream table;
        table << "seed-averaged sup upper bounds:";
        for (std::size_t i = 0; i < k_values.size(); ++i) {
            table << "  K+1=" << k_values[i] << ": curl=" << fmt(curl_ub[i])
                  << ", proposed=" << fmt(prop_ub[i]);
        }
        check.note(table.str());
    }

    bool monotone = true;
    for (std::size_t i = 0; i + 1 < curl_ub.size(); ++i) {
        if (!(curl_ub[i] <= curl_ub[i + 1])) monotone = false;
    }
    check.require(monotone, "CURL upper bound not monotonically increasing across the sweep");

    const double last_curl = curl_ub.back();
    const double last_prop = prop_ub.back();
    check.require(std::isinf(last_curl) || last_curl > 5.0 * last_prop,
                  "largest-K CURL bound " + fmt(last_curl) + " neither flagged-infinite nor > 5x "
                  "proposed " + fmt(last_prop));

    double prop_min = std::numeric_limits<double>::infinity();
    double prop_max = 0.0;
    bool prop_all_finite = true;
    for (double v : prop_ub) {
        if (!std::isfinite(v)) {
            prop_all_finite = false;
            continue;
        }
        prop_min = std::min(prop_min, v);
        prop_max = std::max(prop_max, v);
    }
    check.require(prop_all_finite && (prop_max - prop_min) / prop_min < 0.5,
                  "proposed upper bound varies by " +
                      (prop_all_finite ? fmt(100.0 * (prop_max - prop_min) / prop_min) + "%"
                                       : std::string("an infinite amount")) +
                      " across the sweep (want < 50%)");
    if (!prop_all_finite) {
        check.note("STRUCTURAL NOTE: K+1=8 draws cannot cover 10 classes, so upsilon is "
                   "exactly 0 and the proposed rearrangement is flagged infinite there; at "
                   "K+1=16 upsilon is 0.070, amplifying the bound by 1/upsilon. The <50% "
                   "flatness claim is only attainable on sweeps with K+1 >= |C| ln |C|.");
        // informational restricted-range check over the coupon-covered regime
        std::vector<double> restricted;
        for (std::size_t i = 0; i < k_values.size(); ++i) {
            if (k_values[i] >= 32 && std::isfinite(prop_ub[i])) restricted.push_back(prop_ub[i]);
        }
        if (restricted.size() >= 2) {
            double lo = restricted[0], hi = restricted[0];
            for (double v : restricted) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            check.note("informational: over K+1 >= 32 the proposed bound varies by " +
                       fmt(100.0 * (hi - lo) / lo) + "% (CURL explodes: see table above)");
        }
    }
}

void criterion_collision_flatness(Checker& check, const std::vector<SweepCell>& cells,
                                  const std::vector<std::uint64_t>& seeds) {
    for (const std::uint64_t seed : seeds) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (const SweepCell& c : cells) {
            if (c.seed != seed) continue;
            lo = std::min(lo, c.report.collision_bound.value);
            hi = std::max(hi, c.report.collision_bound.value);
        }
        const double rel = (hi - lo) / lo;
        check.note("seed " + std::to_string(seed) + ": collision bound in [" + fmt(lo) + ", " +
                   fmt(hi) + "], relative range " + fmt(100.0 * rel) + "%");
        check.require(rel < 0.15, "collision-bound relative range " + fmt(100.0 * rel) +
                                      "% >= 15% for seed " + std::to_string(seed));
    }
}

void criterion_probe_inequality(Checker& check, const std::vector<SweepCell>& cells) {
    for (const SweepCell& c : cells) {
        check.require(c.probe_loss <= c.mean_loss + 1e-6,
                      "probe loss " + fmt(c.probe_loss) + " > mean-classifier loss " +
                          fmt(c.mean_loss) + " + 1e-6 (K+1=" + std::to_string(c.k_plus_1) +
                          ", seed=" + std::to_string(c.seed) + ")");
    }
}

void criterion_determinism(Checker& check) {
    const auto a = run_sweep_cell(32, 1);
    const auto b = run_sweep_cell(32, 1);
    check.require(a.csv_row == b.csv_row, "bound CSV rows differ between identical runs");
    check.require(a.final_train_loss == b.final_train_loss,
                  "training losses differ between identical runs");
    check.require(a.probe_loss == b.probe_loss, "probe losses differ between identical runs");
}

// ---------------------------------------------------------------------------
// Criterion 7: gradient check

void criterion_gradient(Checker& check) {
    TrainConfig config;
    config.n_classes = 3;
    config.samples_per_class = 5;
    config.input_dim = 4;
    config.hidden_dim = 3;
    config.embed_dim = 3;
    config.cluster_separation = 3.0;
    config.cluster_sigma = 0.8;
    config.k_negatives = 2;
    config.temperature = 0.5;
    config.seed = 19;
    const auto data = generate_synthetic(config, CounterRng(config.seed, "synthetic"));

    CounterRng rng(29, "fd");
    TupleBatch batch;
    batch.k = config.k_negatives;
    const std::int64_t pairs = 3;
    batch.anchors = Matrix(pairs, config.input_dim);
    batch.positives = Matrix(pairs, config.input_dim);
    batch.negatives = Matrix(pairs * batch.k, config.input_dim);
    for (std::int64_t p = 0; p < pairs; ++p) {
        const auto a = apply_augmentation(data.inputs.row(p), config.augmentation, rng);
        const auto pos = apply_augmentation(data.inputs.row(p), config.augmentation, rng);
        std::copy(a.begin(), a.end(), batch.anchors.row(p).begin());
        std::copy(pos.begin(), pos.end(), batch.positives.row(p).begin());
        for (std::int64_t j = 0; j < batch.k; ++j) {
            const auto nv =
                apply_augmentation(data.inputs.row(5 + 2 * p + j), config.augmentation, rng);
            std::copy(nv.begin(), nv.end(), batch.negatives.row(p * batch.k + j).begin());
        }
    }

    EncoderWeights enc;
    enc.input_dim = config.input_dim;
    enc.hidden_dim = config.hidden_dim;
    enc.embed_dim = config.embed_dim;
    CounterRng wrng(31, "w");
    enc.w1.resize(static_cast<std::size_t>(config.hidden_dim * config.input_dim));
    for (double& w : enc.w1) w = 0.5 * wrng.normal();
    enc.w2.resize(static_cast<std::size_t>(config.embed_dim * config.hidden_dim));
    for (double& w : enc.w2) w = 0.5 * wrng.normal();

    EncoderWeights grad;
    tuple_batch_loss(enc, batch, config.temperature, &grad);

    const double step = 1e-5;
    double max_rel = 0.0;
    auto check_block = [&](std::vector<double>& weights, const std::vector<double>& g) {
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const double keep = weights[i];
            weights[i] = keep + step;
            const double up = tuple_batch_loss(enc, batch, config.temperature, nullptr);
            weights[i] = keep - step;
            const double down = tuple_batch_loss(enc, batch, config.temperature, nullptr);
            weights[i] = keep;
            const double fd = (up - down) / (2.0 * step);
            const double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-6});
            max_rel = std::max(max_rel, std::abs(fd - g[i]) / denom);
        }
    };
    check_block(enc.w1, grad.w1);
    check_block(enc.w2, grad.w2);
    check.note("max relative gradient error " + fmt(max_rel));
    check.require(max_rel < 1e-4, "gradient error " + fmt(max_rel) + " >= 1e-4");
}

// ---------------------------------------------------------------------------
// Criterion 9: proposition-2 verification

void criterion_prop2(Checker& check) {
    for (int c : {3, 4, 5}) {
        const auto r = verify_prop2(c, 4);
        check.require(r.enumerated, "subset family not fully enumerated for |C|=" +
                                        std::to_string(c));
        check.require(r.spread < 1e-4, "|C|=" + std::to_string(c) + ": optimized score spread " +
                                           fmt(r.spread) + " >= 1e-4");
        check.require(r.gradient_norm_at_uniform < 1e-6,
                      "|C|=" + std::to_string(c) + ": stationarity residual at uniform " +
                          fmt(r.gradient_norm_at_uniform) + " >= 1e-6");
    }
}

}  // namespace

int main() {
    std::vector<CriterionResult> results;
    const auto run_criterion = [&](int id, const std::string& name, double budget_seconds,
                                   const std::function<void(Checker&)>& body) {
        CriterionResult r;
        r.id = id;
        r.name = name;
        Checker check(&r.notes);
        const auto start = std::chrono::steady_clock::now();
        try {
            body(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("exception: ") + e.what());
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (budget_seconds > 0.0 && r.seconds > budget_seconds) {
            check.require(false, "runtime " + fmt(r.seconds) + "s exceeded the " +
                                     fmt(budget_seconds) + "s budget");
        }
        r.passed = check.ok();
        std::printf("[%s] criterion %d: %s (%.2fs)\n", r.passed ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.seconds);
        for (const auto& note : r.notes) std::printf("    %s\n", note.c_str());
        std::fflush(stdout);
        results.push_back(std::move(r));
    };

    run_criterion(1, "coupon table (E[K+1] raw/ceil, |C|=1000 harmonic, non-uniform oracle)",
                  5.0, criterion_coupon_table);
    run_criterion(2, "tau rows to two decimals plus the prose spot value", 1.0, criterion_tau);
    run_criterion(3, "upsilon consistency across DP / IE / MC with discrepancy note", 30.0,
                  criterion_upsilon);

    // the shared toy sweep for criteria 4-6 and 8
    const std::vector<std::int64_t> k_values = {8, 16, 32, 64};
    const std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::vector<SweepCell> cells;
    const auto sweep_start = std::chrono::steady_clock::now();
    for (const std::uint64_t seed : seeds) {
        for (const std::int64_t k1 : k_values) {
            cells.push_back(run_sweep_cell(k1, seed));
        }
    }
    const double sweep_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - sweep_start).count();
    std::printf("-- toy sweep (K+1 in {8,16,32,64} x 3 seeds) trained and evaluated in %.1fs\n",
                sweep_seconds);
    std::fflush(stdout);

    run_criterion(4, "bound validity: Eq.-8 and Eq.-10 totals <= L_info + 3 sigma", 0.0,
                  [&](Checker& check) {
                      check.require(sweep_seconds < 600.0,
                                    "sweep runtime " + fmt(sweep_seconds) + "s over the 10-minute budget");
                      criterion_bound_validity(check, cells);
                  });
    run_criterion(5, "figure-1 qualitative reproduction on the sweep", 0.0,
                  [&](Checker& check) { criterion_figure1(check, cells, k_values); });
    run_criterion(6, "collision-bound flatness across K", 0.0,
                  [&](Checker& check) { criterion_collision_flatness(check, cells, seeds); });
    run_criterion(7, "analytic gradient vs central finite differences", 10.0,
                  criterion_gradient);
    run_criterion(8, "probe cross-entropy <= mean-classifier cross-entropy + 1e-6", 0.0,
                  [&](Checker& check) { criterion_probe_inequality(check, cells); });
    run_criterion(9, "proposition-2 constant-score optimality", 30.0, criterion_prop2);
    run_criterion(10, "bit-identical outputs for identical seed and thread count", 0.0,
                  [&](Checker& check) { criterion_determinism(check); });

    int failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    std::printf("\n%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed,
                results.size());
    if (failed > 0) {
        std::printf("see the notes above; failures carry the measured values\n");
    }
    return failed;
}
