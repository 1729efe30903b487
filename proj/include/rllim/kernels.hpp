#pragma once

#include <cstddef>
#include <string_view>

// Hot arithmetic loops used by the weight-estimator network, the MLP
// black box and the ridge solvers. Every operation has a scalar
// reference implementation and (on x86-64 with AVX2+FMA) a vectorized
// variant; the active table is resolved once at startup from the CPU,
// overridable with RLLIM_KERNELS=scalar|avx2|auto.
namespace rllim::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(std::size_t, double, const double*, double*);
    double (*sum)(const double*, std::size_t);
    void (*tanh_vec)(const double*, double*, std::size_t);
    void (*sigmoid_vec)(const double*, double*, std::size_t);
    void (*tanh_backward_vec)(const double*, double*, std::size_t);
};

bool cpu_has_avx2();
bool avx2_compiled();
std::string_view isa_name(Isa isa);

// Table for a specific ISA, or nullptr when that ISA is unavailable on
// this build/CPU. Used by the scalar-vs-SIMD equivalence tests.
const KernelTable* table_for(Isa isa);

Isa active_isa();
// Test hook. Not safe while other threads are inside kernel calls.
void force_isa(Isa isa);

const KernelTable& active();

inline double dot(const double* a, const double* b, std::size_t n) {
    return active().dot(a, b, n);
}

// y[i] += alpha * x[i]
inline void axpy(std::size_t n, double alpha, const double* x, double* y) {
    active().axpy(n, alpha, x, y);
}

inline double sum(const double* x, std::size_t n) {
    return active().sum(x, n);
}

inline void tanh_vec(const double* x, double* y, std::size_t n) {
    active().tanh_vec(x, y, n);
}

inline void sigmoid_vec(const double* x, double* y, std::size_t n) {
    active().sigmoid_vec(x, y, n);
}

// g[i] *= 1 - a[i]^2 where a holds tanh activations
inline void tanh_backward_vec(const double* a, double* g, std::size_t n) {
    active().tanh_backward_vec(a, g, n);
}

}  // namespace rllim::kernels
