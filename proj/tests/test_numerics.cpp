#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "rllim/matrix.hpp"
#include "rllim/preprocess.hpp"
#include "rllim/random.hpp"
#include "rllim/ridge.hpp"

using namespace rllim;

TEST_SUITE_BEGIN("numerics");

TEST_CASE("ridge recovers exact linear data") {
    const Matrix x = Matrix::from_rows({{1}, {2}, {3}});
    const std::vector<double> y{2, 4, 6};
    const std::vector<double> w{1, 1, 1};
    const RidgeFit fit = weighted_ridge_fit(x, y, w, 0.0);
    CHECK(fit.coef[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(0.0).scale(1).epsilon(1e-12));
}

TEST_CASE("unregularized solution is invariant to weight scaling") {
    RandomSource rng(42);
    Matrix x(25, 3);
    std::vector<double> y(25);
    std::vector<double> w(25);
    for (std::size_t r = 0; r < 25; ++r) {
        for (std::size_t c = 0; c < 3; ++c) x(r, c) = rng.normal();
        y[r] = rng.normal();
        w[r] = rng.uniform(0.1, 2.0);
    }
    std::vector<double> w7 = w;
    for (auto& v : w7) v *= 7.0;
    const RidgeFit a = weighted_ridge_fit(x, y, w, 0.0);
    const RidgeFit b = weighted_ridge_fit(x, y, w7, 0.0);
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(a.coef[c] - b.coef[c]) < 1e-10);
    CHECK(std::abs(a.intercept - b.intercept) < 1e-10);
}

TEST_CASE("ridge matches the independent normal-equation oracle") {
    const Matrix x = Matrix::from_rows({{0}, {1}, {2}});
    const std::vector<double> y{1, 1, 4};
    const std::vector<double> w{1, 1, 1};
    const RidgeFit fit = weighted_ridge_fit(x, y, w, 1.0);
    const auto oracle = test_oracle::ridge_normal_equations(x, y, w, 1.0);
    CHECK(std::abs(fit.coef[0] - oracle.coef[0]) < 1e-10);
    CHECK(std::abs(fit.intercept - oracle.intercept) < 1e-10);
}

TEST_CASE("ridge matches the oracle on 100 random instances") {
    RandomSource rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + rng.uniform_index(6);
        const std::size_t n = d + 2 + rng.uniform_index(40);
        Matrix x(n, d);
        std::vector<double> y(n);
        std::vector<double> w(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < d; ++c) x(r, c) = rng.normal();
            y[r] = rng.normal() * 3.0;
            w[r] = rng.uniform(0.01, 4.0);
        }
        const double alpha = trial % 3 == 0 ? 0.0 : rng.uniform(0.0, 2.0);
        const RidgeFit fit = weighted_ridge_fit(x, y, w, alpha);
        const auto oracle = test_oracle::ridge_normal_equations(x, y, w, alpha);
        for (std::size_t c = 0; c < d; ++c) CHECK(std::abs(fit.coef[c] - oracle.coef[c]) < 1e-10);
        CHECK(std::abs(fit.intercept - oracle.intercept) < 1e-10);
    }
}

TEST_CASE("uniform weights with alpha 0 equal ordinary least squares") {
    RandomSource rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 1 + rng.uniform_index(4);
        const std::size_t n = d + 2 + rng.uniform_index(30);
        Matrix x(n, d);
        std::vector<double> y(n);
        const std::vector<double> w(n, 1.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < d; ++c) x(r, c) = rng.normal();
            y[r] = rng.normal();
        }
        const RidgeFit fit = weighted_ridge_fit(x, y, w, 0.0);
        const auto ols = test_oracle::ridge_normal_equations(x, y, w, 0.0);
        for (std::size_t c = 0; c < d; ++c) CHECK(std::abs(fit.coef[c] - ols.coef[c]) < 1e-10);
    }
}

TEST_CASE("zero weight equals row deletion") {
    RandomSource rng(13);
    Matrix x(12, 2);
    std::vector<double> y(12);
    std::vector<double> w(12, 1.0);
    for (std::size_t r = 0; r < 12; ++r) {
        x(r, 0) = rng.normal();
        x(r, 1) = rng.normal();
        y[r] = rng.normal();
    }
    w[4] = 0.0;
    const RidgeFit with_zero = weighted_ridge_fit(x, y, w, 0.5);

    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < 12; ++r)
        if (r != 4) keep.push_back(r);
    const Matrix xd = x.take_rows(keep);
    std::vector<double> yd;
    for (std::size_t r : keep) yd.push_back(y[r]);
    const std::vector<double> wd(11, 1.0);
    const RidgeFit deleted = weighted_ridge_fit(xd, yd, wd, 0.5);

    CHECK(std::abs(with_zero.coef[0] - deleted.coef[0]) < 1e-10);
    CHECK(std::abs(with_zero.coef[1] - deleted.coef[1]) < 1e-10);
    CHECK(std::abs(with_zero.intercept - deleted.intercept) < 1e-10);
}

TEST_CASE("rank deficiency falls back to the alpha floor") {
    // two identical columns, alpha 0: singular normal matrix
    const Matrix x = Matrix::from_rows({{1, 1}, {2, 2}, {3, 3}});
    const std::vector<double> y{1, 2, 3};
    const std::vector<double> w{1, 1, 1};
    const RidgeFit fit = weighted_ridge_fit(x, y, w, 0.0);
    CHECK(fit.alpha == doctest::Approx(1e-10));
    for (double c : fit.coef) CHECK(std::isfinite(c));
    CHECK(ridge_predict(fit, std::vector<double>{2.0, 2.0}) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("ridge input validation") {
    const Matrix x = Matrix::from_rows({{1}, {2}});
    const std::vector<double> y{1, 2};
    CHECK_THROWS_WITH_AS(weighted_ridge_fit(x, y, std::vector<double>{0.0, 0.0}, 0.0),
                         "degenerate weights", std::invalid_argument);
    CHECK_THROWS_AS(weighted_ridge_fit(x, y, std::vector<double>{1.0, -1.0}, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        weighted_ridge_fit(x, std::vector<double>{1.0, std::nan("")}, std::vector<double>{1, 1}, 0.0),
        std::invalid_argument);
}

TEST_CASE("minmax scaler maps columns into [0,1]") {
    Matrix x = Matrix::from_rows({{0, 3}, {5, 3}, {10, 3}});
    const auto [scaler, scaled] = minmax_fit_transform(x);
    CHECK(scaled(0, 0) == doctest::Approx(0.0));
    CHECK(scaled(1, 0) == doctest::Approx(0.5));
    CHECK(scaled(2, 0) == doctest::Approx(1.0));
    // constant column maps to zero
    CHECK(scaled(0, 1) == doctest::Approx(0.0));
    CHECK(scaled(2, 1) == doctest::Approx(0.0));
}

TEST_CASE("out-of-range values are not clipped") {
    Matrix x = Matrix::from_rows({{0.0}, {10.0}});
    const MinMaxScaler scaler = MinMaxScaler::fit(x);
    CHECK(scaler.transform_value(0, 20.0) == doctest::Approx(2.0));
    CHECK(scaler.transform_value(0, -5.0) == doctest::Approx(-0.5));
}

TEST_CASE("minmax transform is idempotent on unit-range data") {
    RandomSource rng(5);
    Matrix x(50, 4);
    for (auto& v : x.data()) v = rng.uniform();
    // force exact (0,1) bounds per column
    for (std::size_t c = 0; c < 4; ++c) {
        x(0, c) = 0.0;
        x(1, c) = 1.0;
    }
    const MinMaxScaler scaler = MinMaxScaler::fit(x);
    const Matrix once = scaler.transform(x);
    const Matrix twice = MinMaxScaler::fit(once).transform(once);
    for (std::size_t i = 0; i < x.data().size(); ++i)
        CHECK(twice.data()[i] == doctest::Approx(once.data()[i]).epsilon(1e-12));
}

TEST_CASE("minmax rejects non-finite input") {
    Matrix x = Matrix::from_rows({{1.0}, {std::nan("")}});
    CHECK_THROWS_AS(MinMaxScaler::fit(x), std::invalid_argument);
}

TEST_CASE("one-hot encoding") {
    const std::vector<std::string> column{"a", "b", "a"};
    const std::vector<std::string> vocab{"a", "b"};
    const Matrix m = one_hot_encode(column, vocab);
    CHECK(m(0, 0) == 1.0);
    CHECK(m(0, 1) == 0.0);
    CHECK(m(1, 0) == 0.0);
    CHECK(m(1, 1) == 1.0);
    CHECK(m(2, 0) == 1.0);

    const Matrix unknown = one_hot_encode(std::vector<std::string>{"c"}, vocab);
    CHECK(unknown(0, 0) == 0.0);
    CHECK(unknown(0, 1) == 0.0);

    CHECK_THROWS_AS(one_hot_encode(column, std::vector<std::string>{}), std::invalid_argument);
    CHECK_THROWS_AS(one_hot_encode(column, std::vector<std::string>{"a", "a"}),
                    std::invalid_argument);
}

TEST_CASE("random source streams are reproducible and label-separated") {
    RandomSource a(123);
    RandomSource b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RandomSource c1 = RandomSource(123).child("split");
    RandomSource c2 = RandomSource(123).child("split");
    RandomSource other = RandomSource(123).child("init");
    CHECK(c1.next_u64() == c2.next_u64());
    CHECK(c1.next_u64() != other.next_u64());

    RandomSource i0 = RandomSource(9).child("iter", 0);
    RandomSource i1 = RandomSource(9).child("iter", 1);
    CHECK(i0.next_u64() != i1.next_u64());
}

TEST_CASE("uniform and normal look sane") {
    RandomSource rng(2024);
    double mean = 0.0;
    double var = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal();
        mean += v;
        var += v * v;
    }
    mean /= n;
    var = var / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);

    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("sampling without replacement yields distinct indices") {
    RandomSource rng(31);
    const auto sample = rng.sample_without_replacement(50, 20);
    CHECK(sample.size() == 20);
    const std::set<std::size_t> uniq(sample.begin(), sample.end());
    CHECK(uniq.size() == 20);
    for (std::size_t v : sample) CHECK(v < 50);
}

TEST_SUITE_END();
