#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvwork/errors.hpp"
#include "curvwork/kernels.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace curvwork;
using namespace curvwork::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

struct ResetBackend {
  ~ResetBackend() { reset_backend(); }
};

}  // namespace

TEST_CASE("scalar shift_axpy semantics") {
  std::vector<double> src = {1, 2, 3, 4};
  std::vector<double> dst(4, 0.0);
  detail::scalar::shift_axpy(dst.data(), src.data(), 4, 1, 0.5, 0.25);
  // dst[k] += 0.5 src[k-1] + 0.25 src[k-2]
  CHECK(dst[0] == 0.0);
  CHECK(dst[1] == 0.5);
  CHECK(dst[2] == 1.0 + 0.25);
  CHECK(dst[3] == 1.5 + 0.5);
  std::vector<double> neg(4, 0.0);
  detail::scalar::shift_axpy(neg.data(), src.data(), 4, -2, 1.0, 0.0);
  CHECK(neg[0] == 3.0);
  CHECK(neg[1] == 4.0);
  CHECK(neg[2] == 0.0);
}

TEST_CASE("shift_axpy conserves mass away from the edges") {
  std::vector<double> src(64, 0.0);
  src[30] = 1.0;
  std::vector<double> dst(64, 0.0);
  shift_axpy(dst, src, 3, 0.7, 0.3);
  double total = 0.0;
  for (double x : dst) total += x;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dst[33] == 0.7);
  CHECK(dst[34] == 0.3);
}

TEST_CASE("span size mismatch throws") {
  std::vector<double> a(5), b(6);
  CHECK_THROWS_AS(shift_axpy(a, b, 0, 1.0, 0.0), DimensionMismatch);
  std::vector<double> p(5), o(4);
  CHECK_THROWS_AS(coherent_curvature(a, a, p, 1.0, o), DimensionMismatch);
}

TEST_CASE("forced backend must be available") {
  ResetBackend guard;
  CHECK(backend_available(Backend::Scalar));
  CHECK_NOTHROW(force_backend(Backend::Scalar));
  CHECK(active_backend() == Backend::Scalar);
  if (!backend_available(Backend::Neon)) CHECK_THROWS_AS(force_backend(Backend::Neon), ValidationError);
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!backend_available(Backend::Avx2)) {
    MESSAGE("AVX2 not available on this host; skipping equivalence checks");
    return;
  }
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 64u, 601u}) {
    CAPTURE(n);
    const auto src = random_vector(n, 7 + n);
    for (std::ptrdiff_t shift : {-5, -1, 0, 1, 2, 9}) {
      CAPTURE(shift);
      auto d1 = random_vector(n, 100 + n);
      auto d2 = d1;
      detail::scalar::shift_axpy(d1.data(), src.data(), static_cast<std::ptrdiff_t>(n), shift, 0.37, 0.11);
      detail::avx2::shift_axpy(d2.data(), src.data(), static_cast<std::ptrdiff_t>(n), shift, 0.37, 0.11);
      CHECK(d1 == d2);
    }
    auto s1 = random_vector(n, 5 + n);
    auto s2 = s1;
    detail::scalar::scale(s1.data(), static_cast<std::ptrdiff_t>(n), 0.3);
    detail::avx2::scale(s2.data(), static_cast<std::ptrdiff_t>(n), 0.3);
    CHECK(s1 == s2);

    const auto row = random_vector(n, 9 + n, 0.0, 1.0);
    const auto m1 = detail::scalar::row_moments(row.data(), static_cast<std::ptrdiff_t>(n), -3.0, 0.01);
    const auto m2 = detail::avx2::row_moments(row.data(), static_cast<std::ptrdiff_t>(n), -3.0, 0.01);
    CHECK(m2.mass == doctest::Approx(m1.mass).epsilon(1e-13));
    CHECK(m2.first == doctest::Approx(m1.first).epsilon(1e-13));
    CHECK(m2.second == doctest::Approx(m1.second).epsilon(1e-13));

    const auto om = random_vector(n, 11 + n, -2.0, 2.0);
    const auto g = random_vector(n, 13 + n, -2.0, 2.0);
    const auto p = random_vector(n, 17 + n, -1.0, 1.0);
    std::vector<double> c1(n), c2(n);
    detail::scalar::coherent_curvature(om.data(), g.data(), p.data(), 0.8, c1.data(), static_cast<std::ptrdiff_t>(n));
    detail::avx2::coherent_curvature(om.data(), g.data(), p.data(), 0.8, c2.data(), static_cast<std::ptrdiff_t>(n));
    CHECK(c1 == c2);
  }
}

TEST_CASE("dispatched coherent kernel matches the closed form") {
  const std::vector<double> om = {0.0, 1.0, -0.5};
  const std::vector<double> g = {1.0, 1.0, 0.0};
  const std::vector<double> p = {1.0, 1.0, 1.0};
  std::vector<double> out(3);
  coherent_curvature(om, g, p, 1.0, out);
  // (0, 1): 1 * 2 / 1.5^2 = 8/9.
  CHECK(out[0] == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  CHECK(out[2] == 0.0);
}

TEST_CASE("row moments of a two-point row") {
  const std::vector<double> row = {0.25, 0.75};
  const auto m = row_moments(row, 1.0, 2.0);
  CHECK(m.mass == 1.0);
  CHECK(m.first == doctest::Approx(0.25 * 1.0 + 0.75 * 3.0));
  CHECK(m.second == doctest::Approx(0.25 * 1.0 + 0.75 * 9.0));
}
