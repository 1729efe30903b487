#include "rllim/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace rllim::kernels {

namespace scalar_impl {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void tanh_vec(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void sigmoid_vec(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void tanh_backward_vec(const double* a, double* g, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) g[i] *= 1.0 - a[i] * a[i];
}

}  // namespace scalar_impl

namespace avx2_impl {
// Defined in kernels_avx2.cpp, compiled with -mavx2 -mfma.
double dot(const double*, const double*, std::size_t);
void axpy(std::size_t, double, const double*, double*);
double sum(const double*, std::size_t);
void tanh_vec(const double*, double*, std::size_t);
void sigmoid_vec(const double*, double*, std::size_t);
void tanh_backward_vec(const double*, double*, std::size_t);
}  // namespace avx2_impl

namespace {

const KernelTable kScalarTable = {
    &scalar_impl::dot,      &scalar_impl::axpy,
    &scalar_impl::sum,      &scalar_impl::tanh_vec,
    &scalar_impl::sigmoid_vec, &scalar_impl::tanh_backward_vec,
};

#if defined(RLLIM_HAVE_AVX2_TU)
const KernelTable kAvx2Table = {
    &avx2_impl::dot,      &avx2_impl::axpy,
    &avx2_impl::sum,      &avx2_impl::tanh_vec,
    &avx2_impl::sigmoid_vec, &avx2_impl::tanh_backward_vec,
};
#endif

Isa resolve_initial_isa() {
    const char* env = std::getenv("RLLIM_KERNELS");
    if (env != nullptr) {
        const std::string v(env);
        if (v == "scalar") return Isa::scalar;
        if (v == "avx2" && avx2_compiled() && cpu_has_avx2()) return Isa::avx2;
        // "auto" or anything unusable falls through to detection
    }
    if (avx2_compiled() && cpu_has_avx2()) return Isa::avx2;
    return Isa::scalar;
}

Isa g_active = resolve_initial_isa();

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool avx2_compiled() {
#if defined(RLLIM_HAVE_AVX2_TU)
    return true;
#else
    return false;
#endif
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

const KernelTable* table_for(Isa isa) {
    if (isa == Isa::scalar) return &kScalarTable;
#if defined(RLLIM_HAVE_AVX2_TU)
    if (isa == Isa::avx2 && cpu_has_avx2()) return &kAvx2Table;
#endif
    return nullptr;
}

Isa active_isa() { return g_active; }

void force_isa(Isa isa) {
    if (table_for(isa) != nullptr) g_active = isa;
}

const KernelTable& active() { return *table_for(g_active); }

}  // namespace rllim::kernels
