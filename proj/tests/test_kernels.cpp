#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "thm/kernels.hpp"

using namespace thm::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& eng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v)
    x = 2.0 * (static_cast<double>(eng() >> 11) * 0x1.0p-53) - 1.0;
  return v;
}

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * (1.0 + std::abs(a) + std::abs(b));
}

}  // namespace

TEST_CASE("scalar kernels against straightforward loops") {
  std::mt19937_64 eng(11);
  for (std::size_t n : {0ul, 1ul, 3ul, 7ul, 8ul, 33ul, 100ul}) {
    auto a = random_vec(eng, n);
    auto b = random_vec(eng, n);
    double ref = 0;
    for (std::size_t i = 0; i < n; ++i) ref += a[i] * b[i];
    CHECK(close(detail::dot_scalar(a.data(), b.data(), n), ref, 1e-15));
  }
}

TEST_CASE("avx2 variants match scalar reference") {
  if (set_level(SimdLevel::avx2) != SimdLevel::avx2) {
    MESSAGE("no AVX2 on this host; dispatch test skipped");
    return;
  }
  std::mt19937_64 eng(42);
  for (std::size_t n : {1ul, 4ul, 5ul, 8ul, 13ul, 64ul, 257ul}) {
    auto a = random_vec(eng, n);
    auto b = random_vec(eng, n);
    auto w = random_vec(eng, n);

    CHECK(close(detail::dot_avx2(a.data(), b.data(), n),
                detail::dot_scalar(a.data(), b.data(), n), 1e-13));
    CHECK(close(detail::dot3_avx2(w.data(), a.data(), b.data(), n),
                detail::dot3_scalar(w.data(), a.data(), b.data(), n), 1e-13));

    auto y1 = random_vec(eng, n);
    auto y2 = y1;
    detail::axpy_avx2(0.37, a.data(), y1.data(), n);
    detail::axpy_scalar(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(close(y1[i], y2[i], 1e-14));
  }

  for (auto [k, m, nn] : {std::array<std::size_t, 3>{1, 1, 1},
                          {3, 4, 5},
                          {17, 6, 10},
                          {40, 15, 15},
                          {64, 21, 3}}) {
    auto a = random_vec(eng, k * m);
    auto b = random_vec(eng, k * nn);
    std::vector<double> c1(m * nn, 0.1), c2(m * nn, 0.1);
    detail::gemm_tn_acc_avx2(c1.data(), a.data(), b.data(), k, m, nn);
    detail::gemm_tn_acc_scalar(c2.data(), a.data(), b.data(), k, m, nn);
    for (std::size_t i = 0; i < m * nn; ++i) CHECK(close(c1[i], c2[i], 1e-13));

    auto a2 = random_vec(eng, m * k);
    std::vector<double> d1(m * nn, -0.2), d2(m * nn, -0.2);
    detail::gemm_nn_acc_avx2(d1.data(), a2.data(), b.data(), m, k, nn);
    detail::gemm_nn_acc_scalar(d2.data(), a2.data(), b.data(), m, k, nn);
    for (std::size_t i = 0; i < m * nn; ++i) CHECK(close(d1[i], d2[i], 1e-13));

    std::vector<double> s1(k * m), s2(k * m);
    auto w = random_vec(eng, k);
    detail::scale_rows_avx2(s1.data(), a.data(), w.data(), k, m);
    detail::scale_rows_scalar(s2.data(), a.data(), w.data(), k, m);
    CHECK(s1 == s2);
  }
  set_level(SimdLevel::avx2);
}

TEST_CASE("dispatch switches levels") {
  const SimdLevel detected = set_level(SimdLevel::avx2);
  std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  const double expected = 32.0;
  CHECK(dot(a.data(), b.data(), 3) == doctest::Approx(expected));
  set_level(SimdLevel::scalar);
  CHECK(active_level() == SimdLevel::scalar);
  CHECK(dot(a.data(), b.data(), 3) == doctest::Approx(expected));
  set_level(detected);
}
