#pragma once

#include <span>
#include <string>
#include <vector>

#include "rllim/matrix.hpp"

namespace rllim {

// Per-column min/max scaler. Transform maps each fitted column into
// [0,1]; constant columns map to 0; out-of-range inputs at inference are
// deliberately not clipped so local linear dynamics survive.
class MinMaxScaler {
public:
    MinMaxScaler() = default;

    static MinMaxScaler fit(const Matrix& x);

    Matrix transform(const Matrix& x) const;
    void transform_row(std::span<const double> in, std::span<double> out) const;
    void inverse_row(std::span<const double> in, std::span<double> out) const;

    double transform_value(std::size_t col, double v) const;

    const std::vector<double>& mins() const { return mins_; }
    const std::vector<double>& maxs() const { return maxs_; }
    std::size_t dim() const { return mins_.size(); }

private:
    std::vector<double> mins_;
    std::vector<double> maxs_;
};

std::pair<MinMaxScaler, Matrix> minmax_fit_transform(const Matrix& x);

// One column per vocabulary entry; rows with a value outside the
// vocabulary encode as all zeros.
Matrix one_hot_encode(std::span<const std::string> column, std::span<const std::string> vocabulary);

}  // namespace rllim
