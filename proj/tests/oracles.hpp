#pragma once

// Test-only reference implementations, kept independent of the library's
// solve paths: the ridge oracle goes through Gauss-Jordan elimination on
// long doubles instead of the library's Cholesky.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "rllim/matrix.hpp"

namespace test_oracle {

struct RidgeSolution {
    std::vector<double> coef;
    double intercept = 0.0;
};

// argmin sum w_i (y_i - x_i b - b0)^2 + alpha ||b||^2 via dense normal
// equations and Gauss-Jordan with partial pivoting
inline RidgeSolution ridge_normal_equations(const rllim::Matrix& x, std::span<const double> y,
                                            std::span<const double> w, double alpha) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const std::size_t m = d + 1;
    std::vector<long double> a(m * m, 0.0L);
    std::vector<long double> rhs(m, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<long double> z(m);
        for (std::size_t c = 0; c < d; ++c) z[c] = x(i, c);
        z[d] = 1.0L;
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < m; ++c) a[r * m + c] += w[i] * z[r] * z[c];
            rhs[r] += w[i] * z[r] * y[i];
        }
    }
    for (std::size_t c = 0; c < d; ++c) a[c * m + c] += alpha;

    // Gauss-Jordan with partial pivoting
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::abs((double)a[r * m + col]) > std::abs((double)a[pivot * m + col])) pivot = r;
        if (a[pivot * m + col] == 0.0L) throw std::runtime_error("oracle: singular system");
        if (pivot != col) {
            for (std::size_t c = 0; c < m; ++c) std::swap(a[pivot * m + c], a[col * m + c]);
            std::swap(rhs[pivot], rhs[col]);
        }
        const long double inv = 1.0L / a[col * m + col];
        for (std::size_t c = 0; c < m; ++c) a[col * m + c] *= inv;
        rhs[col] *= inv;
        for (std::size_t r = 0; r < m; ++r) {
            if (r == col) continue;
            const long double f = a[r * m + col];
            if (f == 0.0L) continue;
            for (std::size_t c = 0; c < m; ++c) a[r * m + c] -= f * a[col * m + c];
            rhs[r] -= f * rhs[col];
        }
    }

    RidgeSolution sol;
    sol.coef.resize(d);
    for (std::size_t c = 0; c < d; ++c) sol.coef[c] = static_cast<double>(rhs[c]);
    sol.intercept = static_cast<double>(rhs[d]);
    return sol;
}

inline double loop_mae(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

}  // namespace test_oracle
