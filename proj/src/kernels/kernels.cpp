#include "thm/kernels.hpp"

namespace thm::kernels {

namespace detail {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3_scalar(const double* w, const double* a, const double* b,
                   std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i] * b[i];
  return s;
}

void scale_rows_scalar(double* s, const double* a, const double* w,
                       std::size_t k, std::size_t m) {
  for (std::size_t q = 0; q < k; ++q) {
    const double wq = w[q];
    const double* arow = a + q * m;
    double* srow = s + q * m;
    for (std::size_t j = 0; j < m; ++j) srow[j] = wq * arow[j];
  }
}

void gemm_tn_acc_scalar(double* c, const double* a, const double* b,
                        std::size_t k, std::size_t m, std::size_t n) {
  for (std::size_t q = 0; q < k; ++q) {
    const double* arow = a + q * m;
    const double* brow = b + q * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double ai = arow[i];
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += ai * brow[j];
    }
  }
}

void gemm_nn_acc_scalar(double* c, const double* a, const double* b,
                        std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t q = 0; q < k; ++q) {
      const double aq = arow[q];
      const double* brow = b + q * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aq * brow[j];
    }
  }
}

}  // namespace detail

namespace {

struct Dispatch {
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*dot3)(const double*, const double*, const double*, std::size_t);
  void (*scale_rows)(double*, const double*, const double*, std::size_t,
                     std::size_t);
  void (*gemm_tn)(double*, const double*, const double*, std::size_t,
                  std::size_t, std::size_t);
  void (*gemm_nn)(double*, const double*, const double*, std::size_t,
                  std::size_t, std::size_t);
};

constexpr Dispatch kScalar = {
    detail::axpy_scalar,       detail::dot_scalar,
    detail::dot3_scalar,       detail::scale_rows_scalar,
    detail::gemm_tn_acc_scalar, detail::gemm_nn_acc_scalar};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Dispatch kAvx2 = {
    detail::axpy_avx2,       detail::dot_avx2,
    detail::dot3_avx2,       detail::scale_rows_avx2,
    detail::gemm_tn_acc_avx2, detail::gemm_nn_acc_avx2};

bool cpu_has_avx2_fma() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

SimdLevel detect_level() {
#if defined(__x86_64__) || defined(_M_X64)
  if (cpu_has_avx2_fma()) return SimdLevel::avx2;
#endif
  return SimdLevel::scalar;
}

SimdLevel g_level = detect_level();
const Dispatch* g_dispatch =
#if defined(__x86_64__) || defined(_M_X64)
    (g_level == SimdLevel::avx2) ? &kAvx2 : &kScalar;
#else
    &kScalar;
#endif

}  // namespace

SimdLevel active_level() { return g_level; }

SimdLevel set_level(SimdLevel level) {
#if defined(__x86_64__) || defined(_M_X64)
  if (level == SimdLevel::avx2 && cpu_has_avx2_fma()) {
    g_level = SimdLevel::avx2;
    g_dispatch = &kAvx2;
    return g_level;
  }
#endif
  g_level = SimdLevel::scalar;
  g_dispatch = &kScalar;
  return g_level;
}

std::string level_name(SimdLevel level) {
  return level == SimdLevel::avx2 ? "avx2" : "scalar";
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  g_dispatch->axpy(a, x, y, n);
}

double dot(const double* a, const double* b, std::size_t n) {
  return g_dispatch->dot(a, b, n);
}

double dot3(const double* w, const double* a, const double* b,
            std::size_t n) {
  return g_dispatch->dot3(w, a, b, n);
}

void scale_rows(double* s, const double* a, const double* w, std::size_t k,
                std::size_t m) {
  g_dispatch->scale_rows(s, a, w, k, m);
}

void gemm_tn_acc(double* c, const double* a, const double* b, std::size_t k,
                 std::size_t m, std::size_t n) {
  g_dispatch->gemm_tn(c, a, b, k, m, n);
}

void gemm_nn_acc(double* c, const double* a, const double* b, std::size_t m,
                 std::size_t k, std::size_t n) {
  g_dispatch->gemm_nn(c, a, b, m, k, n);
}

}  // namespace thm::kernels
