#include <doctest.h>

#include <cmath>
#include <vector>

#include "rllim/kernels.hpp"
#include "rllim/random.hpp"

using namespace rllim;

namespace {

std::vector<double> random_vec(RandomSource& rng, std::size_t n, double lo = -3.0, double hi = 3.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("scalar reference kernels behave") {
    const auto* t = kernels::table_for(kernels::Isa::scalar);
    REQUIRE(t != nullptr);
    const double a[] = {1.0, 2.0, 3.0};
    const double b[] = {4.0, 5.0, 6.0};
    CHECK(t->dot(a, b, 3) == doctest::Approx(32.0));
    CHECK(t->sum(a, 3) == doctest::Approx(6.0));
    double y[] = {1.0, 1.0, 1.0};
    t->axpy(3, 2.0, a, y);
    CHECK(y[0] == doctest::Approx(3.0));
    CHECK(y[2] == doctest::Approx(7.0));
}

TEST_CASE("simd variants match the scalar reference") {
    const auto* simd = kernels::table_for(kernels::Isa::avx2);
    if (simd == nullptr) {
        MESSAGE("avx2 unavailable on this build/CPU; equivalence skipped");
        return;
    }
    const auto* ref = kernels::table_for(kernels::Isa::scalar);
    RandomSource rng(20240811);

    // every length from 0 to a few vectors wide, so tails are exercised
    for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 33, 100, 257, 1024}) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);

        double bound = 1e-300;
        for (std::size_t i = 0; i < n; ++i) bound += std::abs(a[i] * b[i]);
        CHECK(std::abs(simd->dot(a.data(), b.data(), n) - ref->dot(a.data(), b.data(), n)) <=
              1e-13 * bound);
        double sbound = 1e-300;
        for (std::size_t i = 0; i < n; ++i) sbound += std::abs(a[i]);
        CHECK(std::abs(simd->sum(a.data(), n) - ref->sum(a.data(), n)) <= 1e-13 * sbound);

        auto y1 = b;
        auto y2 = b;
        simd->axpy(n, 1.7, a.data(), y1.data());
        ref->axpy(n, 1.7, a.data(), y2.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));
    }
}

TEST_CASE("simd tanh and sigmoid track libm over the working range") {
    const auto* simd = kernels::table_for(kernels::Isa::avx2);
    if (simd == nullptr) {
        MESSAGE("avx2 unavailable on this build/CPU; equivalence skipped");
        return;
    }
    RandomSource rng(7);
    std::vector<double> x;
    for (int i = 0; i < 4096; ++i) x.push_back(rng.uniform(-40.0, 40.0));
    for (int i = 0; i < 256; ++i) x.push_back(rng.uniform(-1e-6, 1e-6));
    x.insert(x.end(), {0.0, -0.0, 1e308, -1e308, 710.0, -710.0, 5e-324});

    std::vector<double> got(x.size());
    std::vector<double> want(x.size());
    simd->tanh_vec(x.data(), got.data(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) want[i] = std::tanh(x[i]);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-12);

    simd->sigmoid_vec(x.data(), got.data(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) want[i] = 1.0 / (1.0 + std::exp(-x[i]));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-12);
}

TEST_CASE("tanh backward multiplies by 1 - a^2") {
    for (auto isa : {kernels::Isa::scalar, kernels::Isa::avx2}) {
        const auto* t = kernels::table_for(isa);
        if (t == nullptr) continue;
        RandomSource rng(99);
        const auto a = random_vec(rng, 37, -0.99, 0.99);
        auto g = random_vec(rng, 37);
        const auto g0 = g;
        t->tanh_backward_vec(a.data(), g.data(), a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(g[i] == doctest::Approx(g0[i] * (1.0 - a[i] * a[i])).epsilon(1e-13));
    }
}

TEST_CASE("dispatch resolves to a usable table") {
    CHECK(kernels::table_for(kernels::active_isa()) != nullptr);
    const double v[] = {0.5, -0.5};
    CHECK(kernels::sum(v, 2) == doctest::Approx(0.0));
}

TEST_SUITE_END();
