#pragma once

// Data-parallel inner loops with a scalar reference implementation and
// vectorized variants chosen at runtime from the host CPU. Elementwise
// kernels agree bit-for-bit across backends; reductions agree to rounding.
//
// Setting CURVWORK_SIMD=scalar in the environment pins the scalar path.

#include <cstddef>
#include <span>

namespace curvwork::kernels {

enum class Backend { Scalar, Avx2, Neon };

const char* backend_name(Backend backend);
bool backend_available(Backend backend);
Backend active_backend();

/// Pins dispatch to `backend`; throws ValidationError if it is not available.
void force_backend(Backend backend);
/// Returns to automatic selection.
void reset_backend();

struct RowMoments {
  double mass = 0.0;    // sum p_k
  double first = 0.0;   // sum p_k x_k
  double second = 0.0;  // sum p_k x_k^2
};

/// dst[k] += w0 * src[k - shift] + w1 * src[k - shift - 1] for every k in
/// range; source entries outside [0, src.size()) read as zero.
void shift_axpy(std::span<double> dst, std::span<const double> src, std::ptrdiff_t shift, double w0,
                double w1);

void scale(std::span<double> row, double factor);

/// Moments of a row on the uniform grid x_k = origin + k * spacing.
RowMoments row_moments(std::span<const double> row, double origin, double spacing);

/// out[k] = p[k] g (g^2 + gamma^2) / (2 omega^2 + g^2 + gamma^2/2)^2.
void coherent_curvature(std::span<const double> omega, std::span<const double> g,
                        std::span<const double> p, double gamma, std::span<double> out);

namespace detail {
// Backend entry points, exposed for equivalence tests.
#define CURVWORK_KERNEL_DECLS                                                                      \
  void shift_axpy(double* dst, const double* src, std::ptrdiff_t n, std::ptrdiff_t shift, double w0, \
                  double w1);                                                                      \
  void scale(double* row, std::ptrdiff_t n, double factor);                                        \
  RowMoments row_moments(const double* row, std::ptrdiff_t n, double origin, double spacing);      \
  void coherent_curvature(const double* omega, const double* g, const double* p, double gamma,      \
                          double* out, std::ptrdiff_t n);

namespace scalar {
CURVWORK_KERNEL_DECLS
}
namespace avx2 {
CURVWORK_KERNEL_DECLS
}
namespace neon {
CURVWORK_KERNEL_DECLS
}
#undef CURVWORK_KERNEL_DECLS
}  // namespace detail

}  // namespace curvwork::kernels
