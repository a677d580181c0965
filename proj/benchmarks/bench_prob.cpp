#include <benchmark/benchmark.h>

#include "negbound/prob.hpp"

using namespace negbound;

namespace {

void BM_CollisionClosedForm(benchmark::State& state) {
    const auto dist = ClassDistribution::uniform(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(collision_probability(dist, 511).value);
    }
}
BENCHMARK(BM_CollisionClosedForm)->Arg(10)->Arg(100)->Arg(1000);

void BM_CoverageDp(benchmark::State& state) {
    const int classes = static_cast<int>(state.range(0));
    const auto dist = ClassDistribution::uniform(classes);
    CoverageOptions opts;
    opts.method = CoverageMethod::dp;
    for (auto _ : state) {
        benchmark::DoNotOptimize(all_classes_probability(dist, 4 * classes, opts).value);
    }
}
BENCHMARK(BM_CoverageDp)->Arg(10)->Arg(100)->Arg(1000);

void BM_CoverageIe(benchmark::State& state) {
    const int classes = static_cast<int>(state.range(0));
    const auto dist = ClassDistribution::uniform(classes);
    CoverageOptions opts;
    opts.method = CoverageMethod::inclusion_exclusion;
    for (auto _ : state) {
        benchmark::DoNotOptimize(all_classes_probability(dist, 8 * classes, opts).value);
    }
}
BENCHMARK(BM_CoverageIe)->Arg(10)->Arg(100);

void BM_CoverageSubsetIe(benchmark::State& state) {
    std::vector<double> probs(static_cast<std::size_t>(state.range(0)));
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) total += static_cast<double>(i + 1);
    for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = static_cast<double>(i + 1) / total;
    const auto dist = ClassDistribution(probs);
    for (auto _ : state) {
        benchmark::DoNotOptimize(all_classes_probability(dist, 6 * state.range(0)).value);
    }
}
BENCHMARK(BM_CoverageSubsetIe)->Arg(8)->Arg(12)->Arg(16);

void BM_CoverageMc(benchmark::State& state) {
    const auto dist = ClassDistribution::uniform(10);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            mc_all_classes(dist, 32, state.range(0), 7).value);
    }
}
BENCHMARK(BM_CoverageMc)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_ExpectedDraws(benchmark::State& state) {
    const auto dist = ClassDistribution::uniform(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(expected_draws(dist).value);
    }
}
BENCHMARK(BM_ExpectedDraws)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
