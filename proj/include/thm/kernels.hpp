#pragma once

#include <cstddef>
#include <string>

// Dense streaming kernels used by the assembly and evaluation inner loops.
// Every kernel has a scalar reference implementation and (on x86-64) an
// AVX2+FMA variant; the active set is chosen once at startup from CPUID and
// can be overridden for equivalence testing.
namespace thm::kernels {

enum class SimdLevel { scalar, avx2 };

// Level currently in use by the dispatched entry points below.
SimdLevel active_level();

// Force a level (used by the equivalence tests). Requesting avx2 on a CPU
// without it falls back to scalar and returns the level actually set.
SimdLevel set_level(SimdLevel level);

std::string level_name(SimdLevel level);

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

// sum_i w[i] * a[i] * b[i]
double dot3(const double* w, const double* a, const double* b, std::size_t n);

// S = diag(w) * A, all row-major k x m
void scale_rows(double* s, const double* a, const double* w, std::size_t k,
                std::size_t m);

// C(m x n) += A(k x m)^T * B(k x n), row-major
void gemm_tn_acc(double* c, const double* a, const double* b, std::size_t k,
                 std::size_t m, std::size_t n);

// C(m x n) += A(m x k) * B(k x n), row-major
void gemm_nn_acc(double* c, const double* a, const double* b, std::size_t m,
                 std::size_t k, std::size_t n);

namespace detail {
// Reference implementations (always compiled; used directly by tests).
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
double dot_scalar(const double* a, const double* b, std::size_t n);
double dot3_scalar(const double* w, const double* a, const double* b,
                   std::size_t n);
void scale_rows_scalar(double* s, const double* a, const double* w,
                       std::size_t k, std::size_t m);
void gemm_tn_acc_scalar(double* c, const double* a, const double* b,
                        std::size_t k, std::size_t m, std::size_t n);
void gemm_nn_acc_scalar(double* c, const double* a, const double* b,
                        std::size_t m, std::size_t k, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
double dot_avx2(const double* a, const double* b, std::size_t n);
double dot3_avx2(const double* w, const double* a, const double* b,
                 std::size_t n);
void scale_rows_avx2(double* s, const double* a, const double* w,
                     std::size_t k, std::size_t m);
void gemm_tn_acc_avx2(double* c, const double* a, const double* b,
                      std::size_t k, std::size_t m, std::size_t n);
void gemm_nn_acc_avx2(double* c, const double* a, const double* b,
                      std::size_t m, std::size_t k, std::size_t n);
#endif
}  // namespace detail

}  // namespace thm::kernels
