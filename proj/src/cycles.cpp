#include "curvwork/cycles.hpp"

#include "curvwork/errors.hpp"
#include "curvwork/parallel.hpp"
#include "curvwork/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace curvwork::cycles {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Coords make2(double a, double b) {
  Coords c(2);
  c << a, b;
  return c;
}

Coords make3(double a, double b, double t) {
  Coords c(3);
  c << a, b, t;
  return c;
}

// Index of the segment containing theta and the local parameter s in [0, 1].
std::pair<std::size_t, double> locate_segment(double theta, std::size_t segments) {
  const double u = std::clamp(theta / kTwoPi, 0.0, 1.0) * static_cast<double>(segments);
  std::size_t idx = static_cast<std::size_t>(std::floor(u));
  if (idx >= segments) idx = segments - 1;
  return {idx, u - static_cast<double>(idx)};
}

}  // namespace

const char* protocol_family_name(ProtocolFamily family) {
  switch (family) {
    case ProtocolFamily::Circle: return "circle";
    case ProtocolFamily::OffsetEllipse: return "offset-ellipse";
    case ProtocolFamily::TemperatureModulated: return "temperature-modulated";
    case ProtocolFamily::PiecewiseLinear: return "piecewise-linear";
    case ProtocolFamily::Custom: return "custom";
  }
  return "unknown";
}

Protocol Protocol::circle(double omega0, double g0, double radius) {
  if (!(radius > 0.0)) throw ValidationError("Protocol::circle: radius must be positive");
  Protocol p;
  p.family_ = ProtocolFamily::Circle;
  p.params_.omega0 = omega0;
  p.params_.g0 = g0;
  p.params_.a = radius;
  p.params_.b = radius;
  return p;
}

Protocol Protocol::offset_ellipse(double omega0, double g0, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("Protocol::offset_ellipse: semi-axes must be positive");
  Protocol p;
  p.family_ = ProtocolFamily::OffsetEllipse;
  p.params_.omega0 = omega0;
  p.params_.g0 = g0;
  p.params_.a = a;
  p.params_.b = b;
  return p;
}

Protocol Protocol::temperature_modulated(double omega0, double g0, double a, double b, double t0,
                                         double delta_t, double phi) {
  if (!(t0 > std::abs(delta_t))) {
    throw ValidationError("Protocol::temperature_modulated: need T0 > |dT| so that T stays positive");
  }
  if (!(a >= 0.0) || !(b >= 0.0)) throw ValidationError("Protocol::temperature_modulated: negative semi-axis");
  Protocol p;
  p.family_ = ProtocolFamily::TemperatureModulated;
  p.params_.omega0 = omega0;
  p.params_.g0 = g0;
  p.params_.a = a;
  p.params_.b = b;
  p.params_.t0 = t0;
  p.params_.delta_t = delta_t;
  p.params_.phi = phi;
  return p;
}

Protocol Protocol::piecewise_linear(std::vector<Coords> vertices, bool closed) {
  if (vertices.size() < 2 || (closed && vertices.size() < 3)) {
    throw ValidationError("Protocol::piecewise_linear: not enough vertices");
  }
  for (const auto& v : vertices) {
    if (v.size() != vertices.front().size()) {
      throw DimensionMismatch("Protocol::piecewise_linear: vertices differ in dimension");
    }
  }
  Protocol p;
  p.family_ = ProtocolFamily::PiecewiseLinear;
  p.params_.vertices = std::move(vertices);
  p.closed_ = closed;
  return p;
}

Protocol Protocol::custom(std::function<Coords(double)> point, std::function<Coords(double)> tangent,
                          bool closed) {
  if (!point || !tangent) throw ValidationError("Protocol::custom: point and tangent are required");
  Protocol p;
  p.family_ = ProtocolFamily::Custom;
  p.closed_ = closed;
  p.custom_point_ = std::move(point);
  p.custom_tangent_ = std::move(tangent);
  return p;
}

std::size_t Protocol::dimension() const {
  switch (family_) {
    case ProtocolFamily::TemperatureModulated: return 3;
    case ProtocolFamily::PiecewiseLinear: return static_cast<std::size_t>(params_.vertices.front().size());
    case ProtocolFamily::Custom: return static_cast<std::size_t>(custom_point_(0.0).size());
    default: return 2;
  }
}

std::size_t Protocol::segment_count() const {
  if (family_ != ProtocolFamily::PiecewiseLinear) return 1;
  return closed_ ? params_.vertices.size() : params_.vertices.size() - 1;
}

Coords Protocol::base_point(double theta) const {
  const auto& q = params_;
  switch (family_) {
    case ProtocolFamily::Circle:
    case ProtocolFamily::OffsetEllipse:
      return make2(q.omega0 + q.a * std::cos(theta), q.g0 + q.b * std::sin(theta));
    case ProtocolFamily::TemperatureModulated:
      return make3(q.omega0 + q.a * std::cos(theta), q.g0 + q.b * std::sin(theta),
                   q.t0 + q.delta_t * std::cos(theta + q.phi));
    case ProtocolFamily::PiecewiseLinear: {
      const std::size_t segments = segment_count();
      const auto [idx, s] = locate_segment(theta, segments);
      const Coords& from = q.vertices[idx];
      const Coords& to = q.vertices[(idx + 1) % q.vertices.size()];
      return from + s * (to - from);
    }
    case ProtocolFamily::Custom:
      return custom_point_(theta);
  }
  return {};
}

Coords Protocol::base_tangent(double theta) const {
  const auto& q = params_;
  switch (family_) {
    case ProtocolFamily::Circle:
    case ProtocolFamily::OffsetEllipse:
      return make2(-q.a * std::sin(theta), q.b * std::cos(theta));
    case ProtocolFamily::TemperatureModulated:
      return make3(-q.a * std::sin(theta), q.b * std::cos(theta), -q.delta_t * std::sin(theta + q.phi));
    case ProtocolFamily::PiecewiseLinear: {
      const std::size_t segments = segment_count();
      const auto [idx, s] = locate_segment(theta, segments);
      (void)s;
      const Coords& from = q.vertices[idx];
      const Coords& to = q.vertices[(idx + 1) % q.vertices.size()];
      return (to - from) * (static_cast<double>(segments) / kTwoPi);
    }
    case ProtocolFamily::Custom:
      return custom_tangent_(theta);
  }
  return {};
}

Coords Protocol::point(double theta) const { return reversed_ ? base_point(kTwoPi - theta) : base_point(theta); }

Coords Protocol::tangent(double theta) const {
  return reversed_ ? Coords(-base_tangent(kTwoPi - theta)) : base_tangent(theta);
}

Protocol Protocol::reversed() const {
  Protocol p = *this;
  p.reversed_ = !reversed_;
  return p;
}

namespace {

double integrand_at(const geometry::ControlModel& model, const Protocol& protocol, double theta) {
  const Coords lambda = protocol.point(theta);
  return geometry::work_one_form(model, lambda).contract(protocol.tangent(theta));
}

// Composite Simpson over [a, b] with m (even) intervals; also returns the
// m/2 estimate when m/2 is even.
struct SimpsonPair {
  double fine = 0.0;
  double coarse = 0.0;
  bool has_coarse = false;
};

SimpsonPair simpson(const std::vector<double>& f, double a, double b) {
  const std::size_t m = f.size() - 1;
  SimpsonPair out;
  auto rule = [&](std::size_t stride) {
    const std::size_t intervals = m / stride;
    const double h = (b - a) / static_cast<double>(intervals);
    double s = f[0] + f[m];
    for (std::size_t k = 1; k < intervals; ++k) s += (k % 2 == 1 ? 4.0 : 2.0) * f[k * stride];
    return s * h / 3.0;
  };
  out.fine = rule(1);
  if ((m / 2) % 2 == 0 && m >= 4) {
    out.coarse = rule(2);
    out.has_coarse = true;
  }
  return out;
}

}  // namespace

LineWork line_integral_work(const geometry::ControlModel& model, const Protocol& protocol,
                            const LineOptions& options) {
  if (options.nodes < 16) throw ValidationError("line_integral_work: need at least 16 nodes");
  if (protocol.dimension() != model.dimension()) {
    throw DimensionMismatch("line_integral_work: protocol and model charts differ");
  }
  LineWork out;
  const bool smooth_closed = protocol.closed() && protocol.family() != ProtocolFamily::PiecewiseLinear;
  if (smooth_closed) {
    const std::size_t n = options.nodes + (options.nodes % 2);
    out.theta.resize(n);
    out.integrand.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      out.theta[k] = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
      out.integrand[k] = integrand_at(model, protocol, out.theta[k]);
    }
    double fine = 0.0;
    double coarse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      fine += out.integrand[k];
      if (k % 2 == 0) coarse += out.integrand[k];
    }
    out.value = fine * kTwoPi / static_cast<double>(n);
    out.residual_estimate = std::abs(out.value - coarse * kTwoPi / static_cast<double>(n / 2));
    out.nodes = n;
  } else {
    const std::size_t segments = protocol.segment_count();
    std::size_t per = std::max<std::size_t>(4, options.nodes / segments);
    per += (4 - per % 4) % 4;  // multiple of 4 so the embedded Simpson exists
    double total = 0.0;
    double total_coarse = 0.0;
    for (std::size_t s = 0; s < segments; ++s) {
      const double a = kTwoPi * static_cast<double>(s) / static_cast<double>(segments);
      const double b = kTwoPi * static_cast<double>(s + 1) / static_cast<double>(segments);
      std::vector<double> f(per + 1);
      for (std::size_t k = 0; k <= per; ++k) {
        // Interior-biased evaluation keeps corner nodes on the right segment.
        double theta = a + (b - a) * static_cast<double>(k) / static_cast<double>(per);
        if (k == per && s + 1 < segments) theta = std::nextafter(b, a);
        f[k] = integrand_at(model, protocol, theta);
        out.theta.push_back(theta);
        out.integrand.push_back(f[k]);
      }
      const SimpsonPair sp = simpson(f, a, b);
      total += sp.fine;
      total_coarse += sp.coarse;
    }
    out.value = total;
    out.residual_estimate = std::abs(total - total_coarse);
    out.nodes = segments * per;
  }
  if (options.check_convergence && out.residual_estimate > options.tolerance * std::max(1.0, std::abs(out.value))) {
    throw NonConvergence("line_integral_work: node doubling changes the result by " +
                         std::to_string(out.residual_estimate));
  }
  return out;
}

namespace {

double signed_area(const Polygon& poly) {
  double a = 0.0;
  const std::size_t n = poly.vertices.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = poly.vertices[k];
    const auto& q = poly.vertices[(k + 1) % n];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

double polar_rule(const geometry::CurvatureField& field, double omega0, double g0, double a, double b,
                  std::size_t radial, std::size_t angular) {
  const auto& gl = quadrature::gauss_legendre(radial);
  const auto angles = quadrature::mirrored_angles(angular);
  std::vector<double> om(angular);
  std::vector<double> gg(angular);
  std::vector<double> val(angular);
  double total = 0.0;
  for (std::size_t r = 0; r < radial; ++r) {
    const double rho = 0.5 * (gl.nodes[r] + 1.0);
    const double w = 0.5 * gl.weights[r];
    for (std::size_t k = 0; k < angular; ++k) {
      om[k] = omega0 + a * rho * angles.cos[k];
      gg[k] = g0 + b * rho * angles.sin[k];
    }
    field.evaluate(om, gg, val);
    total += w * rho * quadrature::mirrored_sum(val);
  }
  return total * a * b * kTwoPi / static_cast<double>(angular);
}

double polygon_rule(const geometry::CurvatureField& field, const Polygon& poly, std::size_t m) {
  const std::size_t n = poly.vertices.size();
  const auto& apex = poly.vertices[0];
  const auto& gl = quadrature::gauss_legendre(m);
  double total = 0.0;
  std::vector<double> om(m);
  std::vector<double> gg(m);
  std::vector<double> val(m);
  for (std::size_t t = 1; t + 1 < n; ++t) {
    const auto& p1 = poly.vertices[t];
    const auto& p2 = poly.vertices[t + 1];
    const double e1x = p1[0] - apex[0], e1y = p1[1] - apex[1];
    const double e2x = p2[0] - apex[0], e2y = p2[1] - apex[1];
    const double area = 0.5 * (e1x * e2y - e2x * e1y);
    // Collapsed square: x = apex + s (e1 + u (e2 - e1)), Jacobian 2 area s.
    double tri = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double sv = 0.5 * (gl.nodes[i] + 1.0);
      for (std::size_t j = 0; j < m; ++j) {
        const double u = 0.5 * (gl.nodes[j] + 1.0);
        om[j] = apex[0] + sv * (e1x + u * (e2x - e1x));
        gg[j] = apex[1] + sv * (e1y + u * (e2y - e1y));
      }
      field.evaluate(om, gg, val);
      double row = 0.0;
      for (std::size_t j = 0; j < m; ++j) row += 0.5 * gl.weights[j] * val[j];
      tri += 0.5 * gl.weights[i] * sv * row;
    }
    total += 2.0 * area * tri;
  }
  return total;
}

double evaluate_region(const geometry::CurvatureField& field, const Region& region, std::size_t radial,
                       std::size_t angular) {
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return polar_rule(field, r.omega0, r.g0, r.radius, r.radius, radial, angular);
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          return polar_rule(field, r.omega0, r.g0, r.a, r.b, radial, angular);
        } else {
          return polygon_rule(field, r, radial);
        }
      },
      region);
}

void validate_region(const Region& region) {
  std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Disk>) {
          if (!(r.radius >= 0.0) || !std::isfinite(r.radius)) throw ValidationError("Disk: radius must be finite and >= 0");
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          if (!(r.a >= 0.0) || !(r.b >= 0.0) || !std::isfinite(r.a) || !std::isfinite(r.b)) {
            throw ValidationError("Ellipse: semi-axes must be finite and >= 0");
          }
        } else {
          if (r.vertices.size() < 3) throw ValidationError("Polygon: need at least three vertices");
        }
      },
      region);
}

}  // namespace

SurfaceIntegral surface_integral_work(const geometry::CurvatureField& field, const Region& region,
                                      const SurfaceOptions& options) {
  validate_region(region);
  if (options.radial < 2 || options.angular < 4) throw ValidationError("surface_integral_work: resolution too low");
  std::size_t radial = options.radial;
  std::size_t angular = options.angular + (options.angular % 2);
  double coarse = evaluate_region(field, region, radial, angular);
  for (std::size_t level = 0;; ++level) {
    radial *= 2;
    angular *= 2;
    const double fine = evaluate_region(field, region, radial, angular);
    const double estimate = std::abs(fine - coarse);
    if (estimate <= options.tolerance * std::max(1.0, std::abs(fine))) {
      return {fine, estimate, radial, angular};
    }
    if (level >= options.max_doublings) {
      throw UnresolvedIntegrand("surface_integral_work: error estimate " + std::to_string(estimate) +
                                " above tolerance at maximum resolution");
    }
    coarse = fine;
  }
}

Region region_of(const Protocol& protocol) {
  if (!protocol.closed()) throw ValidationError("region_of: protocol is not closed");
  const auto& q = protocol.parameters();
  const double orientation = protocol.reversed_direction() ? -1.0 : 1.0;
  switch (protocol.family()) {
    case ProtocolFamily::Circle:
      if (orientation < 0) break;
      return Disk{q.omega0, q.g0, q.a};
    case ProtocolFamily::OffsetEllipse:
      if (orientation < 0) break;
      return Ellipse{q.omega0, q.g0, q.a, q.b};
    case ProtocolFamily::PiecewiseLinear: {
      if (q.vertices.front().size() != 2) break;
      Polygon poly;
      for (const auto& v : q.vertices) poly.vertices.push_back({v(0), v(1)});
      if (orientation < 0) std::reverse(poly.vertices.begin(), poly.vertices.end());
      return poly;
    }
    default:
      break;
  }
  if (orientation < 0 && protocol.family() != ProtocolFamily::PiecewiseLinear) {
    throw ValidationError("region_of: reversed smooth loop has negative orientation");
  }
  throw ValidationError("region_of: protocol does not bound a planar (omega, g) region");
}

std::array<double, 2> region_center(const Region& region) {
  return std::visit(
      [](const auto& r) -> std::array<double, 2> {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Disk> || std::is_same_v<T, Ellipse>) {
          return {r.omega0, r.g0};
        } else {
          const double a = signed_area(r);
          double cx = 0.0, cy = 0.0;
          const std::size_t n = r.vertices.size();
          for (std::size_t k = 0; k < n; ++k) {
            const auto& p = r.vertices[k];
            const auto& q = r.vertices[(k + 1) % n];
            const double cross = p[0] * q[1] - q[0] * p[1];
            cx += (p[0] + q[0]) * cross;
            cy += (p[1] + q[1]) * cross;
          }
          return {cx / (6.0 * a), cy / (6.0 * a)};
        }
      },
      region);
}

CycleResult stokes_check(const geometry::ControlModel& model, const Protocol& protocol,
                         const geometry::CurvatureField& field, const LineOptions& line,
                         const SurfaceOptions& surface) {
  if (!protocol.closed()) throw ValidationError("stokes_check: protocol must be closed");
  if (protocol.dimension() != 2 || model.dimension() != 2) {
    throw ValidationError("stokes_check: needs a planar (omega, g) protocol and model");
  }
  double orientation = 1.0;
  Region region;
  if (protocol.reversed_direction() && protocol.family() != ProtocolFamily::PiecewiseLinear) {
    region = region_of(protocol.reversed());
    orientation = -1.0;
  } else {
    region = region_of(protocol);
  }
  const LineWork lw = line_integral_work(model, protocol, line);
  const SurfaceIntegral si = surface_integral_work(field, region, surface);
  CycleResult out;
  out.w_line = lw.value;
  out.w_surface = orientation * si.value;
  out.nodes = lw.nodes;
  out.line_residual = lw.residual_estimate;
  out.surface_error = si.error_estimate;
  out.segment_work.resize(lw.integrand.size());
  const double dtheta = lw.nodes > 0 ? kTwoPi / static_cast<double>(lw.nodes) : 0.0;
  for (std::size_t k = 0; k < lw.integrand.size(); ++k) out.segment_work[k] = lw.integrand[k] * dtheta;
  return out;
}

double thermal_total_flux(double beta, const SurfaceOptions& options) {
  const auto field = geometry::CurvatureField::thermal_baseline(beta);
  // sech^2(x) < 1e-30 beyond x = 35.
  const double radius = 70.0 / beta;
  const double w = surface_integral_work(field, Disk{0.0, 0.0, radius}, options).value;
  const double w_wide = surface_integral_work(field, Disk{0.0, 0.0, 2.0 * radius}, options).value;
  if (std::abs(w_wide - w) > 1e-10 * std::abs(w)) {
    throw NonConvergence("thermal_total_flux: large-radius flux not converged");
  }
  return w;
}

RadiusSweep radius_sweep(double beta, std::span<const double> radii, const SurfaceOptions& options) {
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0) || (k > 0 && !(radii[k] > radii[k - 1]))) {
      throw ValidationError("radius_sweep: radii must be positive and strictly ascending");
    }
  }
  RadiusSweep sweep;
  sweep.beta = beta;
  sweep.w_infinity = thermal_total_flux(beta, options);
  const auto field = geometry::CurvatureField::thermal_baseline(beta);
  for (double r : radii) {
    const double w = surface_integral_work(field, Disk{0.0, 0.0, r}, options).value;
    sweep.rows.push_back({r, w, w / sweep.w_infinity});
  }
  return sweep;
}

SinusoidFit fit_sinusoid(std::span<const double> phi, std::span<const double> values) {
  if (phi.size() != values.size() || phi.size() < 3) {
    throw ValidationError("fit_sinusoid: need at least three (phi, value) pairs");
  }
  const auto n = static_cast<Eigen::Index>(phi.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    x(k, 0) = 1.0;
    x(k, 1) = std::cos(phi[kk]);
    x(k, 2) = std::sin(phi[kk]);
    y(k) = values[kk];
  }
  const Eigen::Vector3d c = x.colPivHouseholderQr().solve(y);
  SinusoidFit fit;
  fit.offset = c(0);
  fit.amplitude = std::hypot(c(1), c(2));
  // A cos(phi + d) = A cos d cos phi - A sin d sin phi.
  fit.phase = std::atan2(-c(2), c(1));
  const Eigen::VectorXd resid = y - x * c;
  fit.max_residual = resid.cwiseAbs().maxCoeff();
  fit.rms_residual = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
  return fit;
}

PhaseSweep phase_sweep(const PhaseLoop& loop, std::span<const double> phis, const LineOptions& options,
                       unsigned threads) {
  if (!(loop.t0 > loop.delta_t) || !(loop.delta_t >= 0.0)) {
    throw ValidationError("phase_sweep: need T0 > dT >= 0");
  }
  const geometry::ControlModel model = geometry::thermal_qubit_with_temperature();
  PhaseSweep sweep;
  sweep.phi.assign(phis.begin(), phis.end());
  sweep.work.assign(phis.size(), 0.0);
  parallel_for(phis.size(), threads, [&](std::size_t k) {
    const Protocol p = Protocol::temperature_modulated(loop.omega0, loop.g0, loop.a, loop.b, loop.t0,
                                                       loop.delta_t, phis[k]);
    sweep.work[k] = line_integral_work(model, p, options).value;
  });
  sweep.fit = fit_sinusoid(sweep.phi, sweep.work);
  return sweep;
}

EtaReport eta_geom(const Region& region, const EtaSpec& spec, const SurfaceOptions& options) {
  const auto coherent = spec.detailed_balance ? geometry::CurvatureField::coherent_detailed_balance(spec.gamma, spec.beta)
                                              : geometry::CurvatureField::coherent(spec.gamma, spec.p);
  const auto baseline = geometry::CurvatureField::thermal_baseline(spec.beta);
  EtaReport r;
  r.w_coh = surface_integral_work(coherent, region, options).value;
  r.w_pop = surface_integral_work(baseline, region, options).value;
  if (!(std::abs(r.w_pop) > 1e-300)) throw ZeroBaseline("eta_geom: baseline work vanishes over the region");
  r.eta = r.w_coh / r.w_pop;
  const auto c = region_center(region);
  r.local = coherent(c[0], c[1]) / baseline(c[0], c[1]);
  return r;
}

double eta_small_cycle(double omega0, double g0, double gamma, double beta) {
  const double eps = std::hypot(omega0, g0);
  const double d = 2.0 * omega0 * omega0 + g0 * g0 + 0.5 * gamma * gamma;
  return 2.0 * g0 * (g0 * g0 + gamma * gamma) * std::sinh(beta * eps) / (beta * d * d);
}

FirstLawTrace first_law_trace(const geometry::ControlModel& model, const Protocol& protocol, std::size_t n) {
  if (n < 2) throw ValidationError("first_law_trace: need at least two steps");
  std::vector<geometry::ComplexMatrix> rho(n + 1);
  std::vector<geometry::ComplexMatrix> h(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double theta = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
    const Coords lambda = (protocol.closed() && k == n) ? protocol.point(0.0) : protocol.point(theta);
    model.require_in_domain(lambda);
    rho[k] = model.stationary_state(lambda).matrix();
    h[k] = model.hamiltonian(lambda).matrix();
  }
  FirstLawTrace t;
  t.du.resize(n);
  t.dw.resize(n);
  t.dq.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const geometry::ComplexMatrix rho_mid = 0.5 * (rho[k] + rho[k + 1]);
    const geometry::ComplexMatrix h_mid = 0.5 * (h[k] + h[k + 1]);
    t.dw[k] = (rho_mid * (h[k + 1] - h[k])).trace().real();
    t.dq[k] = (h_mid * (rho[k + 1] - rho[k])).trace().real();
    t.du[k] = (rho[k + 1] * h[k + 1]).trace().real() - (rho[k] * h[k]).trace().real();
    t.sum_du += t.du[k];
    t.sum_dw += t.dw[k];
    t.sum_dq += t.dq[k];
    t.max_step_residual = std::max(t.max_step_residual, std::abs(t.du[k] - t.dw[k] - t.dq[k]));
  }
  return t;
}

}  // namespace curvwork::cycles
