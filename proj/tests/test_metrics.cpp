#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rllim/metrics.hpp"
#include "rllim/random.hpp"

using namespace rllim;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("mae basics") {
    const std::vector<double> a{1, 3};
    const std::vector<double> b{2, 2};
    CHECK(mae(a, a) == 0.0);
    CHECK(mae(a, b) == doctest::Approx(1.0));
    CHECK(mae(a, b) == mae(b, a));
    CHECK_THROWS_AS(mae(a, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("mae and lmae match a loop oracle on random data") {
    RandomSource rng(3);
    std::vector<double> p(100);
    std::vector<double> t(100);
    for (std::size_t i = 0; i < 100; ++i) {
        p[i] = rng.normal() * 5.0;
        t[i] = rng.normal() * 5.0;
    }
    CHECK(std::abs(mae(p, t) - test_oracle::loop_mae(p, t)) < 1e-12);
    std::vector<double> l(50);
    std::vector<double> f(50);
    for (std::size_t i = 0; i < 50; ++i) {
        l[i] = rng.uniform(-2, 2);
        f[i] = rng.uniform(-2, 2);
    }
    CHECK(std::abs(lmae(l, f) - test_oracle::loop_mae(l, f)) < 1e-12);
}

TEST_CASE("lmae hand cases") {
    const std::vector<double> f{1, -1};
    const std::vector<double> zero{0, 0};
    CHECK(lmae(f, f) == 0.0);
    CHECK(lmae(zero, f) == doctest::Approx(1.0));
}

TEST_CASE("r2 identities") {
    const std::vector<double> f{0.5, 1.5, 2.5, -1.0};
    CHECK(r2_score(f, f) == 1.0);  // exact

    double m = 0.0;
    for (double v : f) m += v;
    m /= static_cast<double>(f.size());
    const std::vector<double> mean_pred(f.size(), m);
    CHECK(std::abs(r2_score(f, mean_pred)) < 1e-12);
}

TEST_CASE("r2 hand case goes negative") {
    const std::vector<double> f{0, 1, 2};
    const std::vector<double> g{2, 2, 2};
    CHECK(r2_score(f, g) == doctest::Approx(-1.5));
}

TEST_CASE("r2 undefined for constant reference") {
    const std::vector<double> f{1, 1, 1};
    const std::vector<double> g{1, 2, 3};
    CHECK_THROWS_AS(r2_score(f, g), std::invalid_argument);
}

TEST_CASE("apr hand case") {
    const std::vector<double> scores{0.9, 0.8, 0.7};
    const std::vector<int> labels{1, 0, 1};
    CHECK(std::abs(apr(scores, labels) - (1.0 + 2.0 / 3.0) / 2.0) < 1e-10);
}

TEST_CASE("apr is 1 for perfect ranking and undefined without positives") {
    const std::vector<double> scores{0.9, 0.8, 0.2, 0.1};
    const std::vector<int> labels{1, 1, 0, 0};
    CHECK(apr(scores, labels) == doctest::Approx(1.0));
    CHECK_THROWS_AS(apr(scores, std::vector<int>{0, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("apr is invariant under strictly monotone score transforms") {
    RandomSource rng(17);
    std::vector<double> scores(200);
    std::vector<int> labels(200);
    for (std::size_t i = 0; i < 200; ++i) {
        scores[i] = rng.uniform(-4, 4);
        labels[i] = rng.bernoulli(0.3) ? 1 : 0;
    }
    labels[0] = 1;
    std::vector<double> transformed(200);
    for (std::size_t i = 0; i < 200; ++i) transformed[i] = std::atan(3.0 * scores[i]) + 10.0;
    CHECK(apr(scores, labels) == doctest::Approx(apr(transformed, labels)).epsilon(1e-12));
}

TEST_CASE("apr of random scores approaches the positive rate") {
    RandomSource rng(23);
    const std::size_t n = 10000;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = rng.uniform();
        labels[i] = rng.bernoulli(0.5) ? 1 : 0;
        pos += labels[i];
    }
    const double rate = static_cast<double>(pos) / n;
    CHECK(std::abs(apr(scores, labels) - rate) < 0.02);
}

TEST_CASE("awd conventions") {
    const std::vector<double> w{1, 2, 0};
    const std::vector<double> zero{0, 0, 0};
    CHECK(awd(w, w) == 0.0);
    CHECK(awd(w, zero, AwdNorm::mean_abs) == doctest::Approx(1.0));
    CHECK(awd(w, zero, AwdNorm::l1) == doctest::Approx(3.0));
    CHECK(awd(w, zero, AwdNorm::l2) == doctest::Approx(std::sqrt(5.0)));
    CHECK_THROWS_AS(awd(w, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("awd satisfies the triangle inequality") {
    RandomSource rng(29);
    for (auto norm : {AwdNorm::mean_abs, AwdNorm::l1, AwdNorm::l2}) {
        for (int t = 0; t < 50; ++t) {
            std::vector<double> a(5);
            std::vector<double> b(5);
            std::vector<double> c(5);
            for (int i = 0; i < 5; ++i) {
                a[i] = rng.normal();
                b[i] = rng.normal();
                c[i] = rng.normal();
            }
            CHECK(awd(a, c, norm) <= awd(a, b, norm) + awd(b, c, norm) + 1e-12);
        }
    }
}

TEST_CASE("single decile holds the plain mean and boundary ordering is by |stat|") {
    std::vector<DecilePoint> run{{0.5, 1.0}, {0.6, 3.0}, {0.7, 2.0}};
    const std::vector<std::vector<DecilePoint>> runs{run};
    const auto rows = decile_bucket_awd(runs, 1);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean_awd == doctest::Approx(2.0));

    // x10 = -3 is farther from the boundary than x10 = -0.01
    std::vector<DecilePoint> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({0.01 + 0.1 * i, static_cast<double>(i)});
    pts[9].boundary_stat_abs = 3.0;
    const std::vector<std::vector<DecilePoint>> one{pts};
    const auto deciles = decile_bucket_awd(one, 10);
    CHECK(deciles[9].mean_awd == doctest::Approx(9.0));  // the |stat|=3 point is in the top band
}

TEST_CASE("identical per-run means give a zero-width interval") {
    std::vector<std::vector<DecilePoint>> runs;
    for (int r = 0; r < 10; ++r) {
        std::vector<DecilePoint> run;
        for (int i = 0; i < 20; ++i) run.push_back({static_cast<double>(i), 2.5});
        runs.push_back(run);
    }
    for (const auto& row : decile_bucket_awd(runs)) {
        CHECK(row.ci_lo == doctest::Approx(row.mean_awd));
        CHECK(row.ci_hi == doctest::Approx(row.mean_awd));
        CHECK(row.runs == 10);
    }
}

TEST_CASE("t quantile table") {
    CHECK(t_quantile_975(9) == doctest::Approx(2.262));
    CHECK(t_quantile_975(1) == doctest::Approx(12.706));
    CHECK(t_quantile_975(1000) == doctest::Approx(1.960));
}

TEST_SUITE_END();
