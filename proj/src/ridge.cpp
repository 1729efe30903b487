#include "rllim/ridge.hpp"

#include <cmath>
#include <stdexcept>

namespace rllim {

namespace {

// Cholesky solve of a symmetric positive-definite system, in place.
// Returns false on a non-positive pivot.
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0)) return false;
        const double l = std::sqrt(d);
        a[j * n + j] = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / l;
        }
    }
    // forward then backward substitution
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    for (std::size_t ii = n; ii > 0; --ii) {
        const std::size_t i = ii - 1;
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
        b[i] = s / a[i * n + i];
    }
    return true;
}

}  // namespace

RidgeFit weighted_ridge_fit(const Matrix& x, std::span<const double> y,
                            std::span<const double> w, double alpha) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n < 1 || y.size() != n || w.size() != n) throw std::invalid_argument("invalid input: shape mismatch");
    if (!std::isfinite(alpha) || alpha < 0.0) throw std::invalid_argument("invalid input: alpha");
    if (!x.all_finite()) throw std::invalid_argument("invalid input: non-finite feature");

    double weight_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(y[i]) || !std::isfinite(w[i])) throw std::invalid_argument("invalid input: non-finite target or weight");
        if (w[i] < 0.0) throw std::invalid_argument("invalid input: negative weight");
        weight_sum += w[i];
    }
    if (weight_sum <= 0.0) throw std::invalid_argument("degenerate weights");

    // normal equations over the augmented design z_i = [x_i, 1]
    const std::size_t m = d + 1;
    std::vector<double> a(m * m, 0.0);
    std::vector<double> rhs(m, 0.0);
    std::vector<double> z(m);
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w[i];
        if (wi == 0.0) continue;
        const auto xi = x.row(i);
        for (std::size_t c = 0; c < d; ++c) z[c] = xi[c];
        z[d] = 1.0;
        for (std::size_t r = 0; r < m; ++r) {
            const double wz = wi * z[r];
            for (std::size_t c = r; c < m; ++c) a[r * m + c] += wz * z[c];
            rhs[r] += wz * y[i];
        }
    }
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < r; ++c) a[r * m + c] = a[c * m + r];

    double used_alpha = alpha;
    auto solve_with = [&](double reg) {
        std::vector<double> lhs = a;
        std::vector<double> sol(rhs.begin(), rhs.end());
        for (std::size_t c = 0; c < d; ++c) lhs[c * m + c] += reg;
        if (!cholesky_solve(lhs, sol, m)) return std::vector<double>();
        return sol;
    };

    std::vector<double> sol = solve_with(alpha);
    if (sol.empty() && alpha == 0.0) {
        used_alpha = 1e-10;
        sol = solve_with(used_alpha);
    }
    if (sol.empty()) throw std::runtime_error("weighted_ridge_fit: singular normal matrix");

    RidgeFit fit;
    fit.coef.assign(sol.begin(), sol.begin() + d);
    fit.intercept = sol[d];
    fit.alpha = used_alpha;
    for (double v : fit.coef)
        if (!std::isfinite(v)) throw std::runtime_error("weighted_ridge_fit: non-finite solution");
    if (!std::isfinite(fit.intercept)) throw std::runtime_error("weighted_ridge_fit: non-finite solution");
    return fit;
}

double ridge_predict(const RidgeFit& fit, std::span<const double> x) {
    double acc = fit.intercept;
    for (std::size_t c = 0; c < fit.coef.size(); ++c) acc += fit.coef[c] * x[c];
    return acc;
}

}  // namespace rllim
