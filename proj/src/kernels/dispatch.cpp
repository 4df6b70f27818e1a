#include "curvwork/errors.hpp"
#include "curvwork/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace curvwork::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(CURVWORK_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("CURVWORK_SIMD"); env != nullptr && std::strcmp(env, "scalar") == 0) {
    return Backend::Scalar;
  }
  if (cpu_has_avx2()) return Backend::Avx2;
#if defined(CURVWORK_HAVE_NEON)
  return Backend::Neon;
#else
  return Backend::Scalar;
#endif
}

// -1 means "not forced".
std::atomic<int> g_forced{-1};

Backend current() {
  const int forced = g_forced.load(std::memory_order_relaxed);
  if (forced >= 0) return static_cast<Backend>(forced);
  static const Backend detected = detect();
  return detected;
}

}  // namespace

const char* backend_name(Backend backend) {
  switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

bool backend_available(Backend backend) {
  switch (backend) {
    case Backend::Scalar: return true;
    case Backend::Avx2: return cpu_has_avx2();
    case Backend::Neon:
#if defined(CURVWORK_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() { return current(); }

void force_backend(Backend backend) {
  if (!backend_available(backend)) {
    throw ValidationError(std::string("SIMD backend not available: ") + backend_name(backend));
  }
  g_forced.store(static_cast<int>(backend), std::memory_order_relaxed);
}

void reset_backend() { g_forced.store(-1, std::memory_order_relaxed); }

#if defined(CURVWORK_HAVE_AVX2)
#define CURVWORK_AVX2_CASE(call) \
  case Backend::Avx2:            \
    return detail::avx2::call;
#else
#define CURVWORK_AVX2_CASE(call)
#endif
#if defined(CURVWORK_HAVE_NEON)
#define CURVWORK_NEON_CASE(call) \
  case Backend::Neon:            \
    return detail::neon::call;
#else
#define CURVWORK_NEON_CASE(call)
#endif

#define CURVWORK_DISPATCH(call)  \
  switch (current()) {           \
    CURVWORK_AVX2_CASE(call)     \
    CURVWORK_NEON_CASE(call)     \
    default:                     \
      return detail::scalar::call; \
  }

void shift_axpy(std::span<double> dst, std::span<const double> src, std::ptrdiff_t shift, double w0,
                double w1) {
  if (dst.size() != src.size()) throw DimensionMismatch("shift_axpy: rows differ in length");
  const auto n = static_cast<std::ptrdiff_t>(dst.size());
  CURVWORK_DISPATCH(shift_axpy(dst.data(), src.data(), n, shift, w0, w1))
}

void scale(std::span<double> row, double factor) {
  const auto n = static_cast<std::ptrdiff_t>(row.size());
  CURVWORK_DISPATCH(scale(row.data(), n, factor))
}

RowMoments row_moments(std::span<const double> row, double origin, double spacing) {
  const auto n = static_cast<std::ptrdiff_t>(row.size());
  CURVWORK_DISPATCH(row_moments(row.data(), n, origin, spacing))
}

void coherent_curvature(std::span<const double> omega, std::span<const double> g,
                        std::span<const double> p, double gamma, std::span<double> out) {
  if (omega.size() != g.size() || g.size() != p.size() || p.size() != out.size()) {
    throw DimensionMismatch("coherent_curvature: spans differ in length");
  }
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  CURVWORK_DISPATCH(coherent_curvature(omega.data(), g.data(), p.data(), gamma, out.data(), n))
}

}  // namespace curvwork::kernels
