// negbound command-line frontend: probability queries, the synthetic
// training pipeline, bound evaluation, and feature diagnostics.
//
// Exit codes: 0 ok, 2 usage error, 3 numerical failure, 4 training divergence.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "negbound/analysis.hpp"
#include "negbound/bounds.hpp"
#include "negbound/error.hpp"
#include "negbound/io.hpp"
#include "negbound/losses.hpp"
#include "negbound/parallel.hpp"
#include "negbound/prob.hpp"
#include "negbound/toytrain.hpp"
#include "negbound/version.hpp"

#include "svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace negbound;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitDivergence = 4;

// ---------------------------------------------------------------------------
// Run manifest

class Manifest {
public:
    Manifest(std::string command, std::string out_dir)
        : command_(std::move(command)),
          out_dir_(std::move(out_dir)),
          start_(std::chrono::steady_clock::now()) {
        data_["command"] = command_;
        data_["tool_version"] = kVersion;
        data_["output_dir"] = out_dir_;
        data_["outputs"] = json::array();
        data_["status"] = "running";
    }

    void set(const std::string& key, json value) { data_[key] = std::move(value); }

    std::string out_path(const std::string& name) {
        fs::create_directories(out_dir_);
        return (fs::path(out_dir_) / name).string();
    }

    void write_text(const std::string& name, const std::string& text) {
        const std::string path = out_path(name);
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + path + " for writing");
        out << text;
        if (!out) throw std::runtime_error("write failure on " + path);
        data_["outputs"].push_back(path);
    }

    void record_output(const std::string& path) { data_["outputs"].push_back(path); }

    void finish(const std::string& status, const std::string& error = "") {
        data_["status"] = status;
        if (!error.empty()) data_["error"] = error;
        const auto elapsed = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - start_)
                                 .count();
        data_["wall_seconds"] = elapsed;
        fs::create_directories(out_dir_);
        std::ofstream out(fs::path(out_dir_) / "manifest.json");
        out << data_.dump(2) << '\n';
    }

private:
    std::string command_;
    std::string out_dir_;
    std::chrono::steady_clock::time_point start_;
    json data_;
};

// ---------------------------------------------------------------------------
// Shared flag plumbing

struct DistFlags {
    int classes = 0;
    std::string probs_path;

    ClassDistribution resolve() const {
        if (!probs_path.empty()) {
            std::ifstream in(probs_path);
            if (!in) throw std::invalid_argument("cannot open probs file " + probs_path);
            std::vector<double> probs;
            double v;
            while (in >> v) probs.push_back(v);
            if (probs.empty()) {
                throw std::invalid_argument("probs file " + probs_path + " holds no numbers");
            }
            return ClassDistribution(std::move(probs));
        }
        if (classes < 1) {
            throw std::invalid_argument("need --classes N (>= 1) or --probs FILE");
        }
        return ClassDistribution::uniform(classes);
    }
};

void add_dist_flags(CLI::App* cmd, DistFlags* flags) {
    cmd->add_option("--classes", flags->classes, "Number of classes of a uniform distribution");
    cmd->add_option("--probs", flags->probs_path,
                    "File with one probability per class (whitespace separated)");
}

CoverageMethod parse_method(const std::string& name) {
    if (name == "auto") return CoverageMethod::automatic;
    if (name == "dp") return CoverageMethod::dp;
    if (name == "ie") return CoverageMethod::inclusion_exclusion;
    if (name == "mc") return CoverageMethod::monte_carlo;
    throw std::invalid_argument("unknown method '" + name + "' (want auto|dp|ie|mc)");
}

std::string prob_json(const ProbEstimate& est, json extra = json::object()) {
    json j = {{"value", est.value},
              {"stderr", est.std_error},
              {"method", std::string(to_string(est.method))}};
    j.update(extra);
    return j.dump();
}

AugmentationSpec parse_aug(const std::string& kind, double sigma, double drop, bool renorm) {
    AugmentationSpec spec;
    if (kind == "gaussian_noise") spec.kind = AugmentationKind::gaussian_noise;
    else if (kind == "coordinate_dropout") spec.kind = AugmentationKind::coordinate_dropout;
    else if (kind == "compose") spec.kind = AugmentationKind::compose;
    else throw std::invalid_argument("unknown augmentation kind '" + kind + "'");
    spec.sigma = sigma;
    spec.drop_rate = drop;
    spec.renormalize = renorm;
    spec.validate();
    return spec;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// ---------------------------------------------------------------------------
// Probability subcommands

struct CouponArgs {
    DistFlags dist;
    std::int64_t draws = -1;
    std::string method = "auto";
    std::int64_t trials = 1'000'000;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string convention = "k";
};

int run_coupon(const CouponArgs& args) {
    if (args.draws < 0) throw std::invalid_argument("--draws is required and must be >= 0");
    if (args.convention != "k" && args.convention != "k-plus-1") {
        throw std::invalid_argument("--draws-convention must be k or k-plus-1");
    }
    const std::int64_t draws = args.draws + (args.convention == "k-plus-1" ? 1 : 0);
    const auto dist = args.dist.resolve();
    CoverageOptions opts;
    opts.method = parse_method(args.method);
    opts.mc_trials = args.trials;
    opts.mc_seed = args.seed;
    opts.threads = args.threads;
    const auto est = all_classes_probability(dist, draws, opts);
    std::cout << prob_json(est, {{"draws_used", draws}}) << '\n';
    return kExitOk;
}

int run_tau(const DistFlags& dist_flags, std::int64_t k) {
    if (k < 0) throw std::invalid_argument("--k is required and must be >= 0");
    const auto est = collision_probability(dist_flags.resolve(), k);
    std::cout << prob_json(est, {{"k", k}}) << '\n';
    return kExitOk;
}

int run_expected_draws(const DistFlags& dist_flags) {
    const auto dist = dist_flags.resolve();
    const auto e = expected_draws(dist);
    json j = {{"value", e.value},
              {"ceil", e.ceil_value},
              {"stderr", 0.0},
              {"abs_error", e.abs_error},
              {"method", "quadrature"}};
    std::cout << j.dump() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string config_path;
    std::string out_dir = "negbound-train";
    std::string format = "tsv";
    std::optional<std::uint64_t> seed;
    bool print_config = false;
};

int run_train(const TrainArgs& args) {
    TrainConfig config;
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw std::invalid_argument("cannot open config " + args.config_path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        config = train_config_from_json(text);
    }
    if (args.seed) config.seed = *args.seed;
    if (args.print_config) {
        std::cout << train_config_to_json(config) << '\n';
        return kExitOk;
    }
    const EmbeddingFormat format = format_from_string(args.format);
    const std::string ext = args.format == "tsv" ? ".tsv" : ".bin";

    Manifest manifest("train", args.out_dir);
    manifest.set("config", json::parse(train_config_to_json(config)));
    if (!args.config_path.empty()) manifest.set("config_path", args.config_path);
    manifest.set("seed", config.seed);
    try {
        const auto data = generate_synthetic(config, CounterRng(config.seed, "synthetic"));
        auto result = train_encoder(config, data, CounterRng(config.seed, "train"));
        EvalClassifierOptions eval_opts;
        const auto scores = evaluate_classifiers(result.train_embeddings, result.val_embeddings,
                                                 eval_opts, CounterRng(config.seed, "eval"));
        result.mean_acc = scores.mean_acc;
        result.probe_acc = scores.probe_acc;

        const std::string train_path = manifest.out_path("train_embeddings" + ext);
        const std::string val_path = manifest.out_path("val_embeddings" + ext);
        save_embeddings(result.train_embeddings, train_path, format);
        save_embeddings(result.val_embeddings, val_path, format);
        manifest.record_output(train_path);
        manifest.record_output(val_path);
        manifest.write_text("loss_trace.csv", loss_trace_csv(result.loss_trace));
        manifest.set("metrics", json{{"mean_acc", result.mean_acc},
                                     {"probe_acc", result.probe_acc},
                                     {"final_loss", result.loss_trace.empty()
                                                        ? json()
                                                        : json(result.loss_trace.back().value)}});
        manifest.finish("ok");
        std::cout << "train: wrote " << args.out_dir << " (mean_acc=" << scores.mean_acc
                  << ", probe_acc=" << scores.probe_acc << ")\n";
        return kExitOk;
    } catch (const std::exception& e) {
        manifest.finish("error", e.what());
        throw;
    }
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string embeddings_path;
    std::string means_path;
    std::string k_list;
    std::string k_plus_1_list;
    double temperature = 1.0;
    std::int64_t batches = 0;  // 0 = floor(N/(K+1)) * (K+1) * 10 pairs
    int m_aug = 10;
    std::string aug_kind = "gaussian_noise";
    double aug_sigma = 0.1;
    double aug_drop = 0.0;
    bool aug_renormalize = true;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_dir = "negbound-eval";
    std::string format = "both";  // csv|json|both
    std::string convention = "k";
    int probe_epochs = 200;
    double probe_lr = 0.5;
};

std::vector<std::int64_t> resolve_k_values(const EvaluateArgs& args) {
    if (args.k_list.empty() == args.k_plus_1_list.empty()) {
        throw std::invalid_argument("pass exactly one of --k (negatives) or --k-plus-1");
    }
    std::vector<std::int64_t> ks;
    for (const auto& tok : split_list(args.k_list.empty() ? args.k_plus_1_list : args.k_list)) {
        const std::int64_t v = std::stoll(tok);
        const std::int64_t k = args.k_list.empty() ? v - 1 : v;
        if (k < 1) {
            throw std::invalid_argument("negative-sample count K must be >= 1, got K=" +
                                        std::to_string(k));
        }
        ks.push_back(k);
    }
    return ks;
}

int run_evaluate(const EvaluateArgs& args) {
    const auto ks = resolve_k_values(args);
    if (args.format != "csv" && args.format != "json" && args.format != "both") {
        throw std::invalid_argument("--format must be csv, json or both");
    }
    if (args.convention != "k" && args.convention != "k-plus-1") {
        throw std::invalid_argument("--draws-convention must be k or k-plus-1");
    }
    const AugmentationSpec spec =
        parse_aug(args.aug_kind, args.aug_sigma, args.aug_drop, args.aug_renormalize);

    Manifest manifest("evaluate", args.out_dir);
    manifest.set("seed", args.seed);
    manifest.set("embeddings", args.embeddings_path);
    manifest.set("means_embeddings", args.means_path.empty() ? args.embeddings_path
                                                             : args.means_path);
    manifest.set("flags", json{{"t", args.temperature},
                               {"batches", args.batches},
                               {"m_aug", args.m_aug},
                               {"aug_kind", args.aug_kind},
                               {"aug_sigma", args.aug_sigma},
                               {"aug_drop", args.aug_drop},
                               {"aug_renormalize", args.aug_renormalize},
                               {"threads", resolve_threads(args.threads)},
                               {"draws_convention", args.convention}});
    try {
        const EmbeddingSet eval_set = load_embeddings_auto(args.embeddings_path);
        const EmbeddingSet means_set =
            args.means_path.empty() ? eval_set : load_embeddings_auto(args.means_path);
        if (means_set.dim() != eval_set.dim() || means_set.n_classes != eval_set.n_classes) {
            throw std::invalid_argument(
                "evaluate: eval and means embedding sets disagree on h or |C|");
        }

        CounterRng root(args.seed, "evaluate");
        const MeanRepresentations means =
            compute_class_means(means_set, spec, args.m_aug, root.fork("means"));

        // linear evaluation: fit on the means (training) set, score on eval
        const double mean_acc = mean_classifier_accuracy(means, eval_set);
        ProbeOptions popts;
        popts.epochs = args.probe_epochs;
        popts.learning_rate = args.probe_lr;
        popts.init_from_means = &means;
        const ProbeResult probe = train_linear_probe(means_set, popts);
        const double probe_acc = probe_accuracy(probe, eval_set);

        std::vector<BoundReport> reports;
        for (const std::int64_t k : ks) {
            EvalOptions opts;
            opts.temperature = args.temperature;
            opts.threads = args.threads;
            opts.extra_draws = args.convention == "k" ? 1 : 2;
            opts.n_batches = args.batches > 0
                                 ? args.batches
                                 : (eval_set.size() / (k + 1)) * (k + 1) * 10;
            if (opts.n_batches < 1) {
                throw NumericError("evaluate: batch formula yields zero pairs at K+1=" +
                                   std::to_string(k + 1) + "; pass --batches");
            }
            ReportInputs in;
            in.eval_set = &eval_set;
            in.collision_set = &means_set;
            in.means = &means;
            in.mean_acc = mean_acc;
            in.probe_acc = probe_acc;
            auto report = evaluate_bound_report(in, spec, k, opts,
                                                root.fork("k", static_cast<std::uint64_t>(k)));
            if (report.curl.sup.conditional.n_samples == 0 &&
                report.curl.sub.conditional.n_samples == 0 &&
                report.curl.collision.conditional.n_samples == 0) {
                throw NumericError("evaluate: every conditional slice is empty at K+1=" +
                                   std::to_string(k + 1));
            }
            if (!report.note.empty()) {
                std::cerr << "note (K+1=" << k + 1 << "): " << report.note << '\n';
            }
            reports.push_back(std::move(report));
        }

        std::ostringstream csv;
        csv << bound_report_csv_header() << '\n';
        for (const auto& r : reports) csv << bound_report_csv_row(r) << '\n';
        if (args.format != "json") manifest.write_text("bounds.csv", csv.str());
        if (args.format != "csv") manifest.write_text("bounds.json", bound_reports_json(reports));
        std::cout << csv.str();
        manifest.finish("ok");
        return kExitOk;
    } catch (const std::exception& e) {
        manifest.finish("error", e.what());
        throw;
    }
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
    std::string embeddings_list;
    std::string labels_list;  // optional display labels, e.g. the K+1 values
    std::string out_dir = "negbound-analysis";
    int max_classes = 20;
    bool plot = false;
};

int run_analyze(const AnalyzeArgs& args) {
    const auto paths = split_list(args.embeddings_list);
    if (paths.empty()) throw std::invalid_argument("--embeddings requires at least one path");
    auto labels = split_list(args.labels_list);
    if (!labels.empty() && labels.size() != paths.size()) {
        throw std::invalid_argument("--labels must match --embeddings in length");
    }
    if (labels.empty()) {
        for (std::size_t i = 0; i < paths.size(); ++i) labels.push_back(std::to_string(i));
    }

    Manifest manifest("analyze", args.out_dir);
    manifest.set("inputs", json(paths));
    try {
        std::vector<EmbeddingSet> sets;
        sets.reserve(paths.size());
        for (const auto& p : paths) sets.push_back(load_embeddings_auto(p));
        const int n_classes = sets.front().n_classes;
        for (const auto& s : sets) {
            if (s.n_classes != n_classes) {
                throw std::invalid_argument("analyze: sets disagree on the class count");
            }
        }
        const int classes_used = std::min(n_classes, args.max_classes);

        // Per-class cosine histograms on shared edges, pairwise W1 against
        // the first (smallest-K) set, averaged over classes.
        std::vector<double> cosine_w1(sets.size(), 0.0);
        for (int c = 0; c < classes_used; ++c) {
            // shared range across sets for this class
            double lo = 1.0, hi = -1.0;
            std::vector<Histogram> per_set;
            int bins = 0;
            for (std::size_t s = 0; s < sets.size(); ++s) {
                const auto h = within_class_cosine_histogram(sets[s], c);
                if (s == 0) bins = static_cast<int>(h.counts.size());
                lo = std::min(lo, h.bin_edges.front());
                hi = std::max(hi, h.bin_edges.back());
            }
            for (std::size_t s = 0; s < sets.size(); ++s) {
                per_set.push_back(
                    within_class_cosine_histogram(sets[s], c, bins, {{lo, hi}}));
                manifest.write_text(
                    "cosine_" + labels[s] + "_class" + std::to_string(c) + ".csv",
                    histogram_csv(per_set.back()));
            }
            for (std::size_t s = 0; s < sets.size(); ++s) {
                cosine_w1[s] += wasserstein1(per_set[0], per_set[s]) / classes_used;
            }
        }

        // Norm histograms with a unified range (only meaningful for
        // unnormalized sets; normalized inputs are skipped).
        std::vector<double> norm_w1;
        const bool norms_available = !sets.front().normalized;
        if (norms_available) {
            double lo = 1e300, hi = -1e300;
            for (const auto& s : sets) {
                for (std::int64_t i = 0; i < s.size(); ++i) {
                    const double n = std::sqrt(squared_norm(s.features.row(i)));
                    lo = std::min(lo, n);
                    hi = std::max(hi, n);
                }
            }
            std::vector<Histogram> per_set;
            for (std::size_t s = 0; s < sets.size(); ++s) {
                per_set.push_back(norm_histogram(sets[s], {{lo, hi}}));
                manifest.write_text("norms_" + labels[s] + ".csv",
                                    histogram_csv(per_set.back()));
            }
            norm_w1.assign(sets.size(), 0.0);
            for (std::size_t s = 0; s < sets.size(); ++s) {
                norm_w1[s] = wasserstein1(per_set[0], per_set[s]);
            }
        }

        // Relative-change curves: reference = distance between the two
        // smallest settings.
        std::ostringstream w1csv;
        w1csv << "label,cosine_w1,cosine_relative";
        if (norms_available) w1csv << ",norm_w1,norm_relative";
        w1csv << '\n';
        std::vector<double> cosine_rel, norm_rel;
        if (sets.size() >= 2) {
            cosine_rel = relative_change_curve(cosine_w1[1], cosine_w1);
            if (norms_available) norm_rel = relative_change_curve(norm_w1[1], norm_w1);
        }
        char buf[64];
        for (std::size_t s = 0; s < sets.size(); ++s) {
            w1csv << labels[s];
            std::snprintf(buf, sizeof buf, ",%.10g", cosine_w1[s]);
            w1csv << buf;
            std::snprintf(buf, sizeof buf, ",%.10g", cosine_rel.empty() ? 0.0 : cosine_rel[s]);
            w1csv << buf;
            if (norms_available) {
                std::snprintf(buf, sizeof buf, ",%.10g", norm_w1[s]);
                w1csv << buf;
                std::snprintf(buf, sizeof buf, ",%.10g", norm_rel.empty() ? 0.0 : norm_rel[s]);
                w1csv << buf;
            }
            w1csv << '\n';
        }
        manifest.write_text("wasserstein.csv", w1csv.str());

        if (args.plot && sets.size() >= 2) {
            std::vector<double> xs(sets.size());
            for (std::size_t s = 0; s < sets.size(); ++s) xs[s] = static_cast<double>(s);
            std::vector<std::pair<std::string, std::vector<double>>> lines;
            lines.emplace_back("cosine", cosine_rel);
            if (norms_available) lines.emplace_back("norm", norm_rel);
            manifest.write_text("relative_change.svg",
                                svg::line_chart(xs, lines, "setting index",
                                                "relative W1 change",
                                                "Relative change of W1 distance"));
        }
        manifest.finish("ok");
        std::cout << w1csv.str();
        return kExitOk;
    } catch (const std::exception& e) {
        manifest.finish("error", e.what());
        throw;
    }
}

// ---------------------------------------------------------------------------
// plot

struct PlotArgs {
    std::string bounds_csv;
    std::string out_dir = "negbound-plots";
};

int run_plot(const PlotArgs& args) {
    Manifest manifest("plot", args.out_dir);
    manifest.set("input", args.bounds_csv);
    try {
        std::ifstream in(args.bounds_csv);
        if (!in) throw std::invalid_argument("cannot open " + args.bounds_csv);
        std::string header;
        if (!std::getline(in, header)) {
            throw std::invalid_argument(args.bounds_csv + ": empty file");
        }
        const auto columns = split_list(header);
        auto column_of = [&](const std::string& name) {
            for (std::size_t i = 0; i < columns.size(); ++i) {
                if (columns[i] == name) return static_cast<int>(i);
            }
            throw std::invalid_argument("bounds CSV is missing column '" + name + "'");
        };
        const int col_k = column_of("k_plus_1");
        const int col_curl = column_of("sup_ub_curl");
        const int col_prop = column_of("sup_ub_proposed");
        const int col_acc = column_of("linear_acc");
        column_of("upsilon");  // required by the contract even though unused here

        svg::GroupedBars chart;
        chart.series_names = {"CURL-based", "proposed"};
        chart.values.resize(2);
        chart.overlay_name = "linear acc";
        chart.y_label = "supervised-loss upper bound";
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto cells = split_list(line);
            if (cells.size() != columns.size()) {
                throw std::invalid_argument("bounds CSV row has wrong column count: " + line);
            }
            auto value = [&](int idx) {
                const std::string& cell = cells[static_cast<std::size_t>(idx)];
                if (cell == "inf") return std::numeric_limits<double>::infinity();
                if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
                return std::stod(cell);
            };
            chart.categories.push_back("K+1=" + cells[static_cast<std::size_t>(col_k)]);
            chart.values[0].push_back(value(col_curl));
            chart.values[1].push_back(value(col_prop));
            const double acc = value(col_acc);
            chart.overlay.push_back(std::isfinite(acc) ? acc : 0.0);
        }
        if (chart.categories.empty()) {
            throw std::invalid_argument(args.bounds_csv + ": no data rows");
        }
        manifest.write_text("sup_upper_bounds.svg",
                            svg::grouped_bar_chart(chart, "Supervised-loss upper bounds"));
        manifest.finish("ok");
        std::cout << "plot: wrote " << args.out_dir << "/sup_upper_bounds.svg\n";
        return kExitOk;
    } catch (const std::exception& e) {
        manifest.finish("error", e.what());
        throw;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"negative-sample analysis toolkit for InfoNCE bounds"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    CouponArgs coupon;
    auto* coupon_cmd = app.add_subcommand(
        "coupon", "P(all classes drawn) for the coupon collector's problem");
    add_dist_flags(coupon_cmd, &coupon.dist);
    coupon_cmd->add_option("--draws", coupon.draws, "Number of draws")->required();
    coupon_cmd->add_option("--method", coupon.method, "auto|dp|ie|mc");
    coupon_cmd->add_option("--trials", coupon.trials, "Monte-Carlo trials");
    coupon_cmd->add_option("--seed", coupon.seed, "Monte-Carlo seed");
    coupon_cmd->add_option("--threads", coupon.threads, "Worker threads (0 = auto)");
    coupon_cmd->add_option("--draws-convention", coupon.convention,
                           "k: use --draws as given; k-plus-1: use --draws + 1");

    DistFlags tau_dist;
    std::int64_t tau_k = -1;
    auto* tau_cmd = app.add_subcommand("tau", "Collision probability P(Col != 0)");
    add_dist_flags(tau_cmd, &tau_dist);
    tau_cmd->add_option("--k", tau_k, "Number of negative samples")->required();

    DistFlags ed_dist;
    auto* ed_cmd = app.add_subcommand("expected-draws",
                                      "Expected draws to observe every class");
    add_dist_flags(ed_cmd, &ed_dist);

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train the synthetic contrastive pipeline");
    train_cmd->add_option("--config", train.config_path, "TrainConfig JSON path");
    train_cmd->add_option("--out", train.out_dir, "Output directory");
    train_cmd->add_option("--format", train.format, "Embedding format: tsv|packed");
    std::uint64_t train_seed_value = 0;
    auto* train_seed_opt =
        train_cmd->add_option("--seed", train_seed_value, "Override the config seed");
    train_cmd->add_flag("--print-config", train.print_config,
                        "Print the resolved config and exit");

    EvaluateArgs eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate bound reports on embeddings");
    eval_cmd->add_option("--embeddings", eval.embeddings_path, "Evaluation (validation) set")
        ->required();
    eval_cmd->add_option("--means-embeddings", eval.means_path,
                         "Training set for class means / classifiers (defaults to --embeddings)");
    eval_cmd->add_option("--k", eval.k_list, "Comma list of negative-sample counts K");
    eval_cmd->add_option("--k-plus-1", eval.k_plus_1_list, "Comma list of K+1 values");
    eval_cmd->add_option("--t", eval.temperature, "Temperature (default 1.0)");
    eval_cmd->add_option("--batches", eval.batches,
                         "Evaluation pairs per K (default floor(N/(K+1))*(K+1)*10)");
    eval_cmd->add_option("--m-aug", eval.m_aug, "Augmentations per sample for class means");
    eval_cmd->add_option("--aug-kind", eval.aug_kind,
                         "gaussian_noise|coordinate_dropout|compose");
    eval_cmd->add_option("--aug-sigma", eval.aug_sigma, "Noise scale");
    eval_cmd->add_option("--aug-drop", eval.aug_drop, "Dropout rate");
    eval_cmd->add_option("--aug-renormalize", eval.aug_renormalize,
                         "Renormalize after augmentation (default true)");
    eval_cmd->add_option("--seed", eval.seed, "Evaluation seed");
    eval_cmd->add_option("--threads", eval.threads, "Worker threads (0 = auto)");
    eval_cmd->add_option("--out", eval.out_dir, "Output directory");
    eval_cmd->add_option("--format", eval.format, "csv|json|both");
    eval_cmd->add_option("--draws-convention", eval.convention,
                         "Covers-all event uses K+1 (k) or K+2 (k-plus-1) draws");
    eval_cmd->add_option("--probe-epochs", eval.probe_epochs, "Linear probe epochs");
    eval_cmd->add_option("--probe-lr", eval.probe_lr, "Linear probe learning rate");

    AnalyzeArgs analyze;
    auto* analyze_cmd =
        app.add_subcommand("analyze", "Cosine/norm histograms and W1 relative change");
    analyze_cmd->add_option("--embeddings", analyze.embeddings_list,
                            "Comma list of embedding files, smallest setting first")
        ->required();
    analyze_cmd->add_option("--labels", analyze.labels_list,
                            "Comma list of display labels (e.g. K+1 values)");
    analyze_cmd->add_option("--out", analyze.out_dir, "Output directory");
    analyze_cmd->add_option("--max-classes", analyze.max_classes,
                            "Cap on per-class histogram count");
    analyze_cmd->add_flag("--plot", analyze.plot, "Also write SVG plots");

    PlotArgs plot;
    auto* plot_cmd = app.add_subcommand("plot", "Figure-style chart from a bounds CSV");
    plot_cmd->add_option("--bounds", plot.bounds_csv, "bounds.csv from evaluate")->required();
    plot_cmd->add_option("--out", plot.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*coupon_cmd) return run_coupon(coupon);
        if (*tau_cmd) return run_tau(tau_dist, tau_k);
        if (*ed_cmd) return run_expected_draws(ed_dist);
        if (*train_cmd) {
            if (train_seed_opt->count() > 0) train.seed = train_seed_value;
            return run_train(train);
        }
        if (*eval_cmd) return run_evaluate(eval);
        if (*analyze_cmd) return run_analyze(analyze);
        if (*plot_cmd) return run_plot(plot);
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        const std::string msg = e.what();
        std::cerr << "error: " << msg << '\n';
        return msg.rfind("cannot open", 0) == 0 ? kExitUsage : kExitNumeric;
    }
    return kExitUsage;
}
