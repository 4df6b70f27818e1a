#include "curvwork/kernels.hpp"

#include <immintrin.h>

#include <algorithm>

// Built with -mavx2 -mfma -ffp-contract=off; only explicit mul/add intrinsics
// are used so results match the scalar reference exactly.

namespace curvwork::kernels::detail::avx2 {

void shift_axpy(double* dst, const double* src, std::ptrdiff_t n, std::ptrdiff_t shift, double w0,
                double w1) {
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, shift);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, shift + n + 1);
  // Interior where both taps are in range: 1 <= k - shift < n.
  const std::ptrdiff_t in_lo = std::max<std::ptrdiff_t>(lo, shift + 1);
  const std::ptrdiff_t in_hi = std::min<std::ptrdiff_t>(hi, shift + n);
  if (in_lo >= in_hi) {
    scalar::shift_axpy(dst, src, n, shift, w0, w1);
    return;
  }
  auto edge = [&](std::ptrdiff_t k) {
    const std::ptrdiff_t a = k - shift;
    const std::ptrdiff_t b = a - 1;
    const double va = a < n ? src[a] : 0.0;
    const double vb = b >= 0 ? src[b] : 0.0;
    dst[k] = dst[k] + (w0 * va + w1 * vb);
  };
  for (std::ptrdiff_t k = lo; k < in_lo; ++k) edge(k);

  const __m256d vw0 = _mm256_set1_pd(w0);
  const __m256d vw1 = _mm256_set1_pd(w1);
  std::ptrdiff_t k = in_lo;
  for (; k + 4 <= in_hi; k += 4) {
    const __m256d a = _mm256_loadu_pd(src + (k - shift));
    const __m256d b = _mm256_loadu_pd(src + (k - shift - 1));
    const __m256d inc = _mm256_add_pd(_mm256_mul_pd(vw0, a), _mm256_mul_pd(vw1, b));
    _mm256_storeu_pd(dst + k, _mm256_add_pd(_mm256_loadu_pd(dst + k), inc));
  }
  for (; k < in_hi; ++k) edge(k);
  for (k = in_hi; k < hi; ++k) edge(k);
}

void scale(double* row, std::ptrdiff_t n, double factor) {
  const __m256d f = _mm256_set1_pd(factor);
  std::ptrdiff_t k = 0;
  for (; k + 4 <= n; k += 4) _mm256_storeu_pd(row + k, _mm256_mul_pd(_mm256_loadu_pd(row + k), f));
  for (; k < n; ++k) row[k] = row[k] * factor;
}

RowMoments row_moments(const double* row, std::ptrdiff_t n, double origin, double spacing) {
  __m256d mass = _mm256_setzero_pd();
  __m256d first = _mm256_setzero_pd();
  __m256d second = _mm256_setzero_pd();
  const __m256d step = _mm256_set1_pd(spacing);
  const __m256d org = _mm256_set1_pd(origin);
  std::ptrdiff_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d idx = _mm256_set_pd(static_cast<double>(k + 3), static_cast<double>(k + 2),
                                      static_cast<double>(k + 1), static_cast<double>(k));
    const __m256d x = _mm256_add_pd(org, _mm256_mul_pd(idx, step));
    const __m256d p = _mm256_loadu_pd(row + k);
    const __m256d px = _mm256_mul_pd(p, x);
    mass = _mm256_add_pd(mass, p);
    first = _mm256_add_pd(first, px);
    second = _mm256_add_pd(second, _mm256_mul_pd(px, x));
  }
  alignas(32) double lanes[3][4];
  _mm256_store_pd(lanes[0], mass);
  _mm256_store_pd(lanes[1], first);
  _mm256_store_pd(lanes[2], second);
  RowMoments m;
  m.mass = (lanes[0][0] + lanes[0][1]) + (lanes[0][2] + lanes[0][3]);
  m.first = (lanes[1][0] + lanes[1][1]) + (lanes[1][2] + lanes[1][3]);
  m.second = (lanes[2][0] + lanes[2][1]) + (lanes[2][2] + lanes[2][3]);
  for (; k < n; ++k) {
    const double x = origin + static_cast<double>(k) * spacing;
    const double px = row[k] * x;
    m.mass += row[k];
    m.first += px;
    m.second += px * x;
  }
  return m;
}

void coherent_curvature(const double* omega, const double* g, const double* p, double gamma,
                        double* out, std::ptrdiff_t n) {
  const double half_gamma_sq_s = 0.5 * gamma * gamma;
  const double gamma_sq_s = gamma * gamma;
  const __m256d half_gamma_sq = _mm256_set1_pd(half_gamma_sq_s);
  const __m256d gamma_sq = _mm256_set1_pd(gamma_sq_s);
  const __m256d two = _mm256_set1_pd(2.0);
  std::ptrdiff_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d w = _mm256_loadu_pd(omega + k);
    const __m256d gg = _mm256_loadu_pd(g + k);
    const __m256d g2 = _mm256_mul_pd(gg, gg);
    const __m256d d =
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(two, _mm256_mul_pd(w, w)), g2), half_gamma_sq);
    const __m256d num = _mm256_mul_pd(_mm256_loadu_pd(p + k), _mm256_mul_pd(gg, _mm256_add_pd(g2, gamma_sq)));
    _mm256_storeu_pd(out + k, _mm256_div_pd(num, _mm256_mul_pd(d, d)));
  }
  for (; k < n; ++k) {
    const double w = omega[k];
    const double gg = g[k];
    const double g2 = gg * gg;
    const double d = (2.0 * (w * w) + g2) + half_gamma_sq_s;
    out[k] = (p[k] * (gg * (g2 + gamma_sq_s))) / (d * d);
  }
}

}  // namespace curvwork::kernels::detail::avx2
