#pragma once

// Work one-form, curvature and dissipation metric on a control manifold.

#include "curvwork/quantum_core.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace curvwork::geometry {

using Coords = Eigen::VectorXd;
using quantum::ComplexMatrix;

enum class StationaryMode {
  NullSpace,           // null vector of the assembled Liouvillian
  ThermalGibbs,        // exp(-beta H)/Z with beta supplied by the chart
  AnalyticFixedBasis,  // closed-form fixed-basis qubit NESS
};

/// Chart lambda -> (H(lambda), dissipators(lambda)).
///
/// Only coordinates flagged in `work_mask` enter H; the rest (temperature,
/// rates) act through the stationary state alone.
struct ControlModel {
  std::vector<std::string> coordinates;
  std::vector<bool> work_mask;
  StationaryMode mode = StationaryMode::NullSpace;

  std::function<quantum::HermitianOperator(const Coords&)> hamiltonian;
  std::function<std::vector<quantum::LindbladTerm>(const Coords&)> dissipators;
  /// Optional analytic dH/dlambda^i, one entry per coordinate.
  std::function<std::vector<ComplexMatrix>(const Coords&)> hamiltonian_gradient;
  /// Required in ThermalGibbs mode.
  std::function<double(const Coords&)> inverse_temperature;
  /// Required in AnalyticFixedBasis mode.
  std::function<quantum::BlochVector(const Coords&)> analytic_bloch;
  /// Optional validity predicate (e.g. T > 0).
  std::function<bool(const Coords&)> in_domain;

  std::size_t dimension() const { return coordinates.size(); }

  quantum::DensityMatrix stationary_state(const Coords& lambda) const;
  quantum::Superoperator liouvillian(const Coords& lambda) const;
  /// dH/dlambda^i for every coordinate; zero for coordinates outside the mask.
  std::vector<ComplexMatrix> hamiltonian_derivatives(const Coords& lambda) const;
  /// Throws ValidationError if an unmasked coordinate changes H (central FD).
  void check_work_mask(const Coords& lambda, double h = 1e-6) const;
  void require_in_domain(const Coords& lambda) const;
};

/// Qubit H(omega, g) with Gibbs stationary states at fixed beta.
ControlModel thermal_qubit(double beta);
/// Chart (omega, g, T); temperature is not a work coordinate.
ControlModel thermal_qubit_with_temperature();
/// Fixed laboratory-basis dissipation, chart (omega, g).
ControlModel fixed_basis_qubit(double gamma_down, double gamma_up,
                               StationaryMode mode = StationaryMode::NullSpace);
/// Dissipators aligned with the instantaneous energy eigenbasis, rates
/// gamma(1 +- tanh(beta eps/2))/2 so the stationary state is Gibbs.
ControlModel detailed_balance_qubit(double gamma, double beta);

struct WorkOneForm {
  Eigen::VectorXd components;  // A_i = Tr[rho* dH/dlambda^i]

  double contract(const Coords& displacement) const { return components.dot(displacement); }
};

WorkOneForm work_one_form(const ControlModel& model, const Coords& lambda);

struct CurvatureOptions {
  double h = 1e-4;
  bool richardson = false;
};

/// Central-difference d_i A_j - d_j A_i. Throws ValidationError for h < 1e-9.
double curvature_fd(const ControlModel& model, const Coords& lambda, std::size_t i, std::size_t j,
                    const CurvatureOptions& options = {});

/// p g (g^2 + gamma^2) / (2 omega^2 + g^2 + gamma^2/2)^2.
double coherent_curvature_density(double omega, double g, double gamma, double p);

/// (beta/4) sech^2(beta eps / 2): the population-driven baseline density.
double thermal_baseline_density(double omega, double g, double beta);

/// -(1/beta) ln(2 cosh(beta eps / 2)).
double free_energy(double omega, double g, double beta);

/// tanh(beta eps / 2).
double thermal_bias_p(double beta, double epsilon);

struct RatePair {
  double gamma_down = 0.0;
  double gamma_up = 0.0;
};

/// gamma_down = gamma(1+p)/2, gamma_up = gamma(1-p)/2.
RatePair rate_pair_from_p(double gamma, double p);
/// (gamma_down - gamma_up) / (gamma_down + gamma_up).
double bias_from_rates(double gamma_down, double gamma_up);

enum class CurvatureMode { FiniteDifference, CoherentClosedForm, ThermalBaseline };

const char* curvature_mode_name(CurvatureMode mode);

/// Scalar density Omega(omega, g) on the (omega, g) plane.
class CurvatureField {
 public:
  /// Fixed thermal bias p.
  static CurvatureField coherent(double gamma, double p);
  /// p = tanh(beta eps/2) evaluated pointwise.
  static CurvatureField coherent_detailed_balance(double gamma, double beta);
  static CurvatureField thermal_baseline(double beta);
  /// curvature_fd through `model` on plane (i, j); other coordinates are
  /// taken from `anchor`.
  static CurvatureField finite_difference(std::shared_ptr<const ControlModel> model, std::size_t i,
                                          std::size_t j, Coords anchor, CurvatureOptions options = {});

  CurvatureMode mode() const { return mode_; }
  const char* label() const;

  double operator()(double omega, double g) const;
  /// Batched evaluation; the coherent modes go through the SIMD kernels.
  void evaluate(std::span<const double> omega, std::span<const double> g, std::span<double> out) const;

 private:
  CurvatureMode mode_ = CurvatureMode::CoherentClosedForm;
  double gamma_ = 1.0;
  double p_ = 0.0;
  double beta_ = 1.0;
  bool detailed_balance_ = false;
  std::shared_ptr<const ControlModel> model_;
  std::size_t i_ = 0;
  std::size_t j_ = 1;
  Coords anchor_;
  CurvatureOptions options_;
};

struct DissipationMetric {
  Eigen::MatrixXd tensor;   // symmetrized
  double asymmetry = 0.0;   // max |g_ij - g_ji| before symmetrization
  double min_eigenvalue = 0.0;

  bool positive_semidefinite(double tolerance = 1e-9) const { return min_eigenvalue >= -tolerance; }
};

/// Friction tensor sym(Tr[d_iH L_perp^{-1}(d_j rho*)]) over the work
/// coordinates; its quadratic form in lambda-dot is the leading excess work
/// rate of finite-speed driving.
DissipationMetric dissipation_metric(const ControlModel& model, const Coords& lambda, double h = 1e-5);

/// -Tr[(d_i rho*) L_perp^{-1}(d_j rho*)], the pure state-response form.
DissipationMetric state_response_metric(const ControlModel& model, const Coords& lambda, double h = 1e-5);

/// Central-difference d rho*/d lambda^i for every coordinate.
std::vector<ComplexMatrix> stationary_derivatives(const ControlModel& model, const Coords& lambda,
                                                  double h = 1e-5);

}  // namespace curvwork::geometry
