#include <benchmark/benchmark.h>

#include "negbound/bounds.hpp"
#include "negbound/embedding.hpp"
#include "negbound/losses.hpp"

using namespace negbound;

namespace {

EmbeddingSet bench_set(int n_classes, int per_class, int dim) {
    Matrix f(static_cast<std::int64_t>(n_classes) * per_class, dim);
    std::vector<int> labels(static_cast<std::size_t>(n_classes) * per_class);
    CounterRng rng(13, "bench_set");
    std::int64_t row = 0;
    for (int c = 0; c < n_classes; ++c) {
        for (int s = 0; s < per_class; ++s, ++row) {
            double norm = 0.0;
            std::vector<double> v(static_cast<std::size_t>(dim));
            for (int d = 0; d < dim; ++d) {
                v[static_cast<std::size_t>(d)] = (d == c % dim ? 1.0 : 0.0) + 0.3 * rng.normal();
                norm += v[static_cast<std::size_t>(d)] * v[static_cast<std::size_t>(d)];
            }
            norm = std::sqrt(norm);
            for (int d = 0; d < dim; ++d) {
                f.at(row, d) = static_cast<float>(v[static_cast<std::size_t>(d)] / norm);
            }
            labels[static_cast<std::size_t>(row)] = c;
        }
    }
    return make_embedding_set(std::move(f), std::move(labels), n_classes, true);
}

const AugmentationSpec kAug{AugmentationKind::gaussian_noise, 0.1, 0.0, true};

void BM_InfoNceBatch(benchmark::State& state) {
    const auto set = bench_set(10, 50, 16);
    const std::int64_t k = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            estimate_l_info(set, kAug, k, 1.0, 256, CounterRng(5, "b"), 1).value);
    }
}
BENCHMARK(BM_InfoNceBatch)->Arg(7)->Arg(31)->Arg(63)->Unit(benchmark::kMillisecond);

void BM_ClassMeans(benchmark::State& state) {
    const auto set = bench_set(10, static_cast<int>(state.range(0)), 16);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            compute_class_means(set, kAug, 10, CounterRng(6, "m")).class_means.data.size());
    }
}
BENCHMARK(BM_ClassMeans)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_CollisionUpperBound(benchmark::State& state) {
    const auto set = bench_set(10, static_cast<int>(state.range(0)), 16);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            collision_upper_bound(set, kAug, CounterRng(7, "c"), 1).value);
    }
}
BENCHMARK(BM_CollisionUpperBound)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_BoundReport(benchmark::State& state) {
    const auto set = bench_set(10, 50, 16);
    const auto means = compute_class_means(set, kAug, 10, CounterRng(8, "m"));
    ReportInputs in;
    in.eval_set = &set;
    in.means = &means;
    EvalOptions opts;
    opts.n_batches = 1000;
    opts.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            evaluate_bound_report(in, kAug, state.range(0), opts, CounterRng(9, "r")).l_info.value);
    }
}
BENCHMARK(BM_BoundReport)->Arg(15)->Arg(31)->Unit(benchmark::kMillisecond);

}  // namespace
