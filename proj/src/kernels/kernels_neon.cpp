#include "curvwork/kernels.hpp"

#include <arm_neon.h>

#include <algorithm>

namespace curvwork::kernels::detail::neon {

void shift_axpy(double* dst, const double* src, std::ptrdiff_t n, std::ptrdiff_t shift, double w0,
                double w1) {
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, shift);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, shift + n + 1);
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
  const float64x2_t vw0 = vdupq_n_f64(w0);
  const float64x2_t vw1 = vdupq_n_f64(w1);
  std::ptrdiff_t k = in_lo;
  for (; k + 2 <= in_hi; k += 2) {
    const float64x2_t a = vld1q_f64(src + (k - shift));
    const float64x2_t b = vld1q_f64(src + (k - shift - 1));
    const float64x2_t inc = vaddq_f64(vmulq_f64(vw0, a), vmulq_f64(vw1, b));
    vst1q_f64(dst + k, vaddq_f64(vld1q_f64(dst + k), inc));
  }
  for (; k < in_hi; ++k) edge(k);
  for (k = in_hi; k < hi; ++k) edge(k);
}

void scale(double* row, std::ptrdiff_t n, double factor) {
  const float64x2_t f = vdupq_n_f64(factor);
  std::ptrdiff_t k = 0;
  for (; k + 2 <= n; k += 2) vst1q_f64(row + k, vmulq_f64(vld1q_f64(row + k), f));
  for (; k < n; ++k) row[k] = row[k] * factor;
}

RowMoments row_moments(const double* row, std::ptrdiff_t n, double origin, double spacing) {
  float64x2_t mass = vdupq_n_f64(0.0);
  float64x2_t first = vdupq_n_f64(0.0);
  float64x2_t second = vdupq_n_f64(0.0);
  std::ptrdiff_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const double xs[2] = {origin + static_cast<double>(k) * spacing,
                          origin + static_cast<double>(k + 1) * spacing};
    const float64x2_t x = vld1q_f64(xs);
    const float64x2_t p = vld1q_f64(row + k);
    const float64x2_t px = vmulq_f64(p, x);
    mass = vaddq_f64(mass, p);
    first = vaddq_f64(first, px);
    second = vaddq_f64(second, vmulq_f64(px, x));
  }
  RowMoments m;
  m.mass = vgetq_lane_f64(mass, 0) + vgetq_lane_f64(mass, 1);
  m.first = vgetq_lane_f64(first, 0) + vgetq_lane_f64(first, 1);
  m.second = vgetq_lane_f64(second, 0) + vgetq_lane_f64(second, 1);
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
  const double hgs = 0.5 * gamma * gamma;
  const double gs = gamma * gamma;
  const float64x2_t half_gamma_sq = vdupq_n_f64(hgs);
  const float64x2_t gamma_sq = vdupq_n_f64(gs);
  const float64x2_t two = vdupq_n_f64(2.0);
  std::ptrdiff_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t w = vld1q_f64(omega + k);
    const float64x2_t gg = vld1q_f64(g + k);
    const float64x2_t g2 = vmulq_f64(gg, gg);
    const float64x2_t d = vaddq_f64(vaddq_f64(vmulq_f64(two, vmulq_f64(w, w)), g2), half_gamma_sq);
    const float64x2_t num = vmulq_f64(vld1q_f64(p + k), vmulq_f64(gg, vaddq_f64(g2, gamma_sq)));
    vst1q_f64(out + k, vdivq_f64(num, vmulq_f64(d, d)));
  }
  for (; k < n; ++k) {
    const double w = omega[k];
    const double gg = g[k];
    const double g2 = gg * gg;
    const double d = (2.0 * (w * w) + g2) + hgs;
    out[k] = (p[k] * (gg * (g2 + gs))) / (d * d);
  }
}

}  // namespace curvwork::kernels::detail::neon
