#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace negbound {

/// Thread count resolution: explicit request > NEGBOUND_THREADS env > hardware.
int resolve_threads(int requested = 0);

/// Run fn(i) for i in [0, n) over `threads` workers on contiguous index
/// blocks.  Callers produce determinism by writing results into per-index
/// slots (or per-shard accumulators keyed by index), never by sharing order-
/// dependent state.
void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn);

/// Deterministic pairwise (fixed-shape tree) reduction.  The result depends
/// only on the contents of `values`, not on thread count.
double pairwise_sum(std::span<const double> values);

/// Neumaier compensated accumulator.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) noexcept;
    [[nodiscard]] double value() const noexcept { return sum + comp; }
};

/// Compensated sum of terms sorted by increasing magnitude; the standard
/// treatment for alternating series with heavy cancellation.
double sorted_compensated_sum(std::vector<double> terms);

struct MeanStderr {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n = 0;
};

/// Mean and standard error (sample stddev / sqrt(n)) with deterministic
/// pairwise accumulation.
MeanStderr mean_stderr(std::span<const double> values);

}  // namespace negbound
