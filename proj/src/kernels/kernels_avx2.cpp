// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; callers reach it only through the runtime dispatch table.
#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstddef>

#include "thm/kernels.hpp"

namespace thm::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swap = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swap));
}

}  // namespace

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3_avx2(const double* w, const double* a, const double* b,
                 std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                 _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), prod, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * a[i] * b[i];
  return s;
}

void scale_rows_avx2(double* s, const double* a, const double* w,
                     std::size_t k, std::size_t m) {
  for (std::size_t q = 0; q < k; ++q) {
    const __m256d wq = _mm256_set1_pd(w[q]);
    const double* arow = a + q * m;
    double* srow = s + q * m;
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4)
      _mm256_storeu_pd(srow + j,
                       _mm256_mul_pd(wq, _mm256_loadu_pd(arow + j)));
    for (; j < m; ++j) srow[j] = w[q] * arow[j];
  }
}

void gemm_tn_acc_avx2(double* c, const double* a, const double* b,
                      std::size_t k, std::size_t m, std::size_t n) {
  for (std::size_t q = 0; q < k; ++q) {
    const double* arow = a + q * m;
    const double* brow = b + q * n;
    for (std::size_t i = 0; i < m; ++i) {
      const __m256d ai = _mm256_set1_pd(arow[i]);
      double* crow = c + i * n;
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256d cc = _mm256_loadu_pd(crow + j);
        cc = _mm256_fmadd_pd(ai, _mm256_loadu_pd(brow + j), cc);
        _mm256_storeu_pd(crow + j, cc);
      }
      for (; j < n; ++j) crow[j] += arow[i] * brow[j];
    }
  }
}

void gemm_nn_acc_avx2(double* c, const double* a, const double* b,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t q = 0; q < k; ++q) {
      const __m256d aq = _mm256_set1_pd(arow[q]);
      const double* brow = b + q * n;
      std::size_t j = 0;
      for (; j + 4 <= n; j += 4) {
        __m256d cc = _mm256_loadu_pd(crow + j);
        cc = _mm256_fmadd_pd(aq, _mm256_loadu_pd(brow + j), cc);
        _mm256_storeu_pd(crow + j, cc);
      }
      for (; j < n; ++j) crow[j] += arow[q] * brow[j];
    }
  }
}

}  // namespace thm::kernels::detail

#endif  // x86-64
