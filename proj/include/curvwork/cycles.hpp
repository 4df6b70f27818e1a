#pragma once

// Protocols on the control manifold and the quadratures that turn them into
// cycle work: line integrals of the work one-form, surface integrals of
// curvature densities, sweeps, the coherent/population work ratio and
// first-law bookkeeping.

#include "curvwork/geometry.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace curvwork::cycles {

using geometry::Coords;

enum class ProtocolFamily { Circle, OffsetEllipse, TemperatureModulated, PiecewiseLinear, Custom };

const char* protocol_family_name(ProtocolFamily family);

struct ProtocolParameters {
  double omega0 = 0.0;
  double g0 = 0.0;
  double a = 0.0;  // omega semi-axis (circle: radius)
  double b = 0.0;  // g semi-axis
  double t0 = 0.0;
  double delta_t = 0.0;
  double phi = 0.0;
  std::vector<Coords> vertices;
};

/// Path theta in [0, 2pi] -> lambda(theta).
class Protocol {
 public:
  /// omega = omega0 + r cos(theta), g = g0 + r sin(theta).
  static Protocol circle(double omega0, double g0, double radius);
  static Protocol offset_ellipse(double omega0, double g0, double a, double b);
  /// Chart (omega, g, T) with T(theta) = T0 + dT cos(theta + phi). Requires T0 > |dT|.
  static Protocol temperature_modulated(double omega0, double g0, double a, double b, double t0,
                                        double delta_t, double phi);
  /// Straight segments through `vertices`, each spanning an equal share of
  /// [0, 2pi]. A closed protocol returns to the first vertex.
  static Protocol piecewise_linear(std::vector<Coords> vertices, bool closed);
  static Protocol custom(std::function<Coords(double)> point, std::function<Coords(double)> tangent,
                         bool closed);

  Coords point(double theta) const;
  /// d lambda / d theta.
  Coords tangent(double theta) const;

  bool closed() const { return closed_; }
  bool reversed_direction() const { return reversed_; }
  ProtocolFamily family() const { return family_; }
  const ProtocolParameters& parameters() const { return params_; }
  std::size_t dimension() const;
  std::size_t segment_count() const;

  /// Same path traversed backwards.
  Protocol reversed() const;

 private:
  Coords base_point(double theta) const;
  Coords base_tangent(double theta) const;

  ProtocolFamily family_ = ProtocolFamily::Circle;
  ProtocolParameters params_;
  bool closed_ = true;
  bool reversed_ = false;
  std::function<Coords(double)> custom_point_;
  std::function<Coords(double)> custom_tangent_;
};

struct LineOptions {
  std::size_t nodes = 256;
  double tolerance = 1e-8;
  bool check_convergence = true;
};

struct LineWork {
  double value = 0.0;
  std::size_t nodes = 0;
  double residual_estimate = 0.0;  // |W(n) - W(n/2)| on the embedded grid
  std::vector<double> theta;
  std::vector<double> integrand;   // A_i dlambda^i/dtheta at theta
};

/// Closed smooth loops: periodic trapezoid. Open paths: composite Simpson.
/// Piecewise-linear: Simpson per segment. Throws NonConvergence when
/// check_convergence is set and the embedded estimate exceeds tolerance.
LineWork line_integral_work(const geometry::ControlModel& model, const Protocol& protocol,
                            const LineOptions& options = {});

struct Disk {
  double omega0 = 0.0;
  double g0 = 0.0;
  double radius = 1.0;
};
struct Ellipse {
  double omega0 = 0.0;
  double g0 = 0.0;
  double a = 1.0;
  double b = 1.0;
};
struct Polygon {
  std::vector<std::array<double, 2>> vertices;  // counter-clockwise is positive
};
using Region = std::variant<Disk, Ellipse, Polygon>;

struct SurfaceOptions {
  std::size_t radial = 64;
  std::size_t angular = 128;
  double tolerance = 1e-9;        // relative to max(1, |W|)
  std::size_t max_doublings = 2;
};

struct SurfaceIntegral {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t radial = 0;
  std::size_t angular = 0;
};

/// Polar Gauss-Legendre x mirrored trapezoid product rule for disks and
/// ellipses; signed fan triangulation with a collapsed Gauss-Legendre rule
/// on each triangle for polygons.
/// Resolution is doubled until the change drops below tolerance.
SurfaceIntegral surface_integral_work(const geometry::CurvatureField& field, const Region& region,
                                      const SurfaceOptions& options = {});

/// Planar region bounded by a closed circle, ellipse or polygon protocol.
Region region_of(const Protocol& protocol);
std::array<double, 2> region_center(const Region& region);

struct CycleResult {
  double w_line = 0.0;
  double w_surface = 0.0;
  std::size_t nodes = 0;
  double line_residual = 0.0;
  double surface_error = 0.0;
  std::vector<double> segment_work;  // per-node line contributions

  double gap() const { return w_line - w_surface; }
};

CycleResult stokes_check(const geometry::ControlModel& model, const Protocol& protocol,
                         const geometry::CurvatureField& field, const LineOptions& line = {},
                         const SurfaceOptions& surface = {});

struct RadiusSweepRow {
  double epsilon = 0.0;
  double work = 0.0;
  double normalized = 0.0;
};

struct RadiusSweep {
  double beta = 0.0;
  double w_infinity = 0.0;
  std::vector<RadiusSweepRow> rows;
};

/// Converged large-radius flux of the thermal baseline density.
double thermal_total_flux(double beta, const SurfaceOptions& options = {});

/// Baseline flux through disks of the given (positive, ascending) radii.
RadiusSweep radius_sweep(double beta, std::span<const double> radii, const SurfaceOptions& options = {});

struct SinusoidFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;  // W ~ offset + amplitude cos(phi + phase)
  double max_residual = 0.0;
  double rms_residual = 0.0;
};

/// Linear least squares on (1, cos phi, sin phi).
SinusoidFit fit_sinusoid(std::span<const double> phi, std::span<const double> values);

struct PhaseLoop {
  double omega0 = 0.0;
  double g0 = 0.0;
  double a = 1.0;
  double b = 1.0;
  double t0 = 1.0;
  double delta_t = 0.0;
};

struct PhaseSweep {
  std::vector<double> phi;
  std::vector<double> work;
  SinusoidFit fit;
};

/// Thermal cycle work on the (omega, g, T) chart for each phase offset.
PhaseSweep phase_sweep(const PhaseLoop& loop, std::span<const double> phis, const LineOptions& options = {},
                       unsigned threads = 1);

struct EtaSpec {
  double gamma = 1.0;
  double beta = 1.0;
  bool detailed_balance = true;  // p = tanh(beta eps/2) pointwise; otherwise fixed p
  double p = 1.0;
};

struct EtaReport {
  double w_coh = 0.0;
  double w_pop = 0.0;
  double eta = 0.0;
  double local = 0.0;  // Omega_coh / Omega_pop at the region center
};

/// W_coh / W_pop over `region`. Throws ZeroBaseline if W_pop vanishes.
EtaReport eta_geom(const Region& region, const EtaSpec& spec, const SurfaceOptions& options = {});

/// 2 g0 (g0^2 + gamma^2) sinh(beta eps0) / (beta (2 omega0^2 + g0^2 + gamma^2/2)^2).
double eta_small_cycle(double omega0, double g0, double gamma, double beta);

struct FirstLawTrace {
  std::vector<double> du;
  std::vector<double> dw;
  std::vector<double> dq;
  double sum_du = 0.0;
  double sum_dw = 0.0;
  double sum_dq = 0.0;
  double max_step_residual = 0.0;  // max |dU - dW - dQ|
};

/// Stationary-state bookkeeping along n steps: dW = Tr[rho_mid dH],
/// dQ = Tr[H_mid d rho], dU = difference of Tr[rho H].
FirstLawTrace first_law_trace(const geometry::ControlModel& model, const Protocol& protocol, std::size_t n);

struct FiniteRateOptions {
  std::size_t steps_per_period = 0;  // 0 picks dt <= 0.01
  std::size_t cycles = 3;            // work is read from the last cycle
  std::size_t metric_nodes = 128;
};

struct FiniteRateResult {
  double period = 0.0;
  double work = 0.0;
  double geometric_work = 0.0;
  double excess_work = 0.0;
  double predicted_dissipation = 0.0;
};

/// (2pi/period) * loop integral of g_ij lambda'^i lambda'^j dtheta.
double predicted_dissipated_work(const geometry::ControlModel& model, const Protocol& protocol, double period,
                                 std::size_t nodes = 128);

/// Drives the master equation around a closed protocol in time `period`
/// (RK4 on the vectorized state) and compares the last-cycle work with the
/// geometric work and the metric prediction.
FiniteRateResult finite_rate_cycle_work(const geometry::ControlModel& model, const Protocol& protocol,
                                        double period, const FiniteRateOptions& options = {});

}  // namespace curvwork::cycles
