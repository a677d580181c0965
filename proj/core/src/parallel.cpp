#include "negbound/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace negbound {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("NEGBOUND_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn) {
    if (n <= 0) return;
    threads = std::min<std::int64_t>(resolve_threads(threads), n);
    if (threads <= 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        const std::int64_t lo = n * t / threads;
        const std::int64_t hi = n * (t + 1) / threads;
        pool.emplace_back([lo, hi, &fn] {
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

namespace {

double pairwise_sum_impl(std::span<const double> v) {
    if (v.size() <= 32) {
        KahanSum acc;
        for (double x : v) acc.add(x);
        return acc.value();
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum_impl(v.first(half)) + pairwise_sum_impl(v.subspan(half));
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    return pairwise_sum_impl(values);
}

void KahanSum::add(double x) noexcept {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
        comp += (sum - t) + x;
    } else {
        comp += (x - t) + sum;
    }
    sum = t;
}

double sorted_compensated_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end(),
              [](double a, double b) { return std::abs(a) < std::abs(b); });
    KahanSum acc;
    for (double t : terms) acc.add(t);
    return acc.value();
}

MeanStderr mean_stderr(std::span<const double> values) {
    MeanStderr r;
    r.n = static_cast<std::int64_t>(values.size());
    if (r.n == 0) return r;
    r.mean = pairwise_sum(values) / static_cast<double>(r.n);
    if (r.n == 1) return r;
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - r.mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(r.n - 1);
    r.std_error = std::sqrt(var / static_cast<double>(r.n));
    return r;
}

}  // namespace negbound
