#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace negbound {

/// Row-major dense float matrix.  Feature storage is float so the packed
/// file format round-trips bit-exactly; arithmetic accumulates in double.
struct Matrix {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<float> data;

    Matrix() = default;
    Matrix(std::int64_t r, std::int64_t c)
        : rows(r), cols(c), data(static_cast<std::size_t>(r * c), 0.0f) {}

    std::span<float> row(std::int64_t i) {
        return {data.data() + i * cols, static_cast<std::size_t>(cols)};
    }
    std::span<const float> row(std::int64_t i) const {
        return {data.data() + i * cols, static_cast<std::size_t>(cols)};
    }
    float& at(std::int64_t i, std::int64_t j) { return data[static_cast<std::size_t>(i * cols + j)]; }
    float at(std::int64_t i, std::int64_t j) const { return data[static_cast<std::size_t>(i * cols + j)]; }
};

inline double dot(std::span<const float> a, std::span<const float> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return s;
}

inline double squared_norm(std::span<const float> a) {
    double s = 0.0;
    for (float x : a) s += static_cast<double>(x) * static_cast<double>(x);
    return s;
}

}  // namespace negbound
