#include "curvwork/kernels.hpp"

#include <algorithm>

namespace curvwork::kernels::detail::scalar {

void shift_axpy(double* dst, const double* src, std::ptrdiff_t n, std::ptrdiff_t shift, double w0,
                double w1) {
  // Valid k: at least one of k - shift, k - shift - 1 lies in [0, n).
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, shift);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, shift + n + 1);
  for (std::ptrdiff_t k = lo; k < hi; ++k) {
    const std::ptrdiff_t a = k - shift;
    const std::ptrdiff_t b = a - 1;
    const double va = a < n ? src[a] : 0.0;
    const double vb = b >= 0 ? src[b] : 0.0;
    dst[k] = dst[k] + (w0 * va + w1 * vb);
  }
}

void scale(double* row, std::ptrdiff_t n, double factor) {
  for (std::ptrdiff_t k = 0; k < n; ++k) row[k] = row[k] * factor;
}

RowMoments row_moments(const double* row, std::ptrdiff_t n, double origin, double spacing) {
  RowMoments m;
  for (std::ptrdiff_t k = 0; k < n; ++k) {
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
  const double half_gamma_sq = 0.5 * gamma * gamma;
  const double gamma_sq = gamma * gamma;
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const double w = omega[k];
    const double gg = g[k];
    const double g2 = gg * gg;
    const double d = (2.0 * (w * w) + g2) + half_gamma_sq;
    out[k] = (p[k] * (gg * (g2 + gamma_sq))) / (d * d);
  }
}

}  // namespace curvwork::kernels::detail::scalar
