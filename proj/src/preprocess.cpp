#include "rllim/preprocess.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace rllim {

MinMaxScaler MinMaxScaler::fit(const Matrix& x) {
    if (x.empty()) throw std::invalid_argument("invalid input: empty matrix");
    if (!x.all_finite()) throw std::invalid_argument("invalid input: non-finite entry");
    MinMaxScaler s;
    s.mins_.assign(x.cols(), 0.0);
    s.maxs_.assign(x.cols(), 0.0);
    for (std::size_t c = 0; c < x.cols(); ++c) {
        double lo = x(0, c);
        double hi = x(0, c);
        for (std::size_t r = 1; r < x.rows(); ++r) {
            lo = std::min(lo, x(r, c));
            hi = std::max(hi, x(r, c));
        }
        s.mins_[c] = lo;
        s.maxs_[c] = hi;
    }
    return s;
}

double MinMaxScaler::transform_value(std::size_t col, double v) const {
    const double range = maxs_[col] - mins_[col];
    if (range == 0.0) return 0.0;
    return (v - mins_[col]) / range;
}

Matrix MinMaxScaler::transform(const Matrix& x) const {
    if (x.cols() != dim()) throw std::invalid_argument("invalid input: column count mismatch");
    if (!x.all_finite()) throw std::invalid_argument("invalid input: non-finite entry");
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = transform_value(c, x(r, c));
    return out;
}

void MinMaxScaler::transform_row(std::span<const double> in, std::span<double> out) const {
    for (std::size_t c = 0; c < dim(); ++c) out[c] = transform_value(c, in[c]);
}

void MinMaxScaler::inverse_row(std::span<const double> in, std::span<double> out) const {
    for (std::size_t c = 0; c < dim(); ++c) out[c] = mins_[c] + in[c] * (maxs_[c] - mins_[c]);
}

std::pair<MinMaxScaler, Matrix> minmax_fit_transform(const Matrix& x) {
    MinMaxScaler s = MinMaxScaler::fit(x);
    return {s, s.transform(x)};
}

Matrix one_hot_encode(std::span<const std::string> column, std::span<const std::string> vocabulary) {
    if (vocabulary.empty()) throw std::invalid_argument("invalid input: empty vocabulary");
    std::unordered_set<std::string> seen;
    for (const auto& v : vocabulary)
        if (!seen.insert(v).second) throw std::invalid_argument("invalid input: duplicate vocabulary entry");
    Matrix out(column.size(), vocabulary.size(), 0.0);
    for (std::size_t r = 0; r < column.size(); ++r) {
        for (std::size_t c = 0; c < vocabulary.size(); ++c) {
            if (column[r] == vocabulary[c]) {
                out(r, c) = 1.0;
                break;
            }
        }
    }
    return out;
}

}  // namespace rllim
