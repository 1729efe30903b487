#pragma once

#include <span>
#include <vector>

#include "rllim/matrix.hpp"

namespace rllim {

struct RidgeFit {
    std::vector<double> coef;
    double intercept = 0.0;
    double alpha = 0.0;
};

// argmin over (beta, b) of sum_i w_i (y_i - x_i beta - b)^2 + alpha ||beta||^2,
// solved by normal equations on the weight-scaled design. The intercept is
// not regularized. If alpha == 0 leaves the normal matrix singular the solve
// is retried with alpha = 1e-10; local fits on a handful of selected samples
// are routinely underdetermined.
RidgeFit weighted_ridge_fit(const Matrix& x, std::span<const double> y,
                            std::span<const double> w, double alpha);

double ridge_predict(const RidgeFit& fit, std::span<const double> x);

}  // namespace rllim
