#include "curvwork/geometry.hpp"

#include "curvwork/errors.hpp"
#include "curvwork/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace curvwork::geometry {
namespace {

using quantum::Complex;
using quantum::DensityMatrix;
using quantum::HermitianOperator;
using quantum::LindbladTerm;

double epsilon_of(double omega, double g) { return std::hypot(omega, g); }

std::vector<ComplexMatrix> qubit_gradient(std::size_t dimension) {
  std::vector<ComplexMatrix> grad(dimension, ComplexMatrix::Zero(2, 2));
  grad[0] = 0.5 * quantum::pauli_z();
  grad[1] = 0.5 * quantum::pauli_x();
  return grad;
}

DissipationMetric finalize(Eigen::MatrixXd raw) {
  DissipationMetric m;
  m.asymmetry = (raw - raw.transpose()).cwiseAbs().maxCoeff();
  m.tensor = 0.5 * (raw + raw.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.tensor, Eigen::EigenvaluesOnly);
  m.min_eigenvalue = es.eigenvalues().minCoeff();
  return m;
}

}  // namespace

DensityMatrix ControlModel::stationary_state(const Coords& lambda) const {
  switch (mode) {
    case StationaryMode::ThermalGibbs:
      if (!inverse_temperature) throw ValidationError("ControlModel: thermal mode needs inverse_temperature");
      return quantum::gibbs_state(hamiltonian(lambda), inverse_temperature(lambda));
    case StationaryMode::AnalyticFixedBasis:
      if (!analytic_bloch) throw ValidationError("ControlModel: analytic mode needs analytic_bloch");
      return quantum::density_from_bloch(analytic_bloch(lambda));
    case StationaryMode::NullSpace:
      break;
  }
  return quantum::stationary_state(liouvillian(lambda));
}

quantum::Superoperator ControlModel::liouvillian(const Coords& lambda) const {
  if (!dissipators) throw ValidationError("ControlModel: model has no dissipators");
  return quantum::build_liouvillian(hamiltonian(lambda), dissipators(lambda));
}

std::vector<ComplexMatrix> ControlModel::hamiltonian_derivatives(const Coords& lambda) const {
  const std::size_t d = dimension();
  if (static_cast<std::size_t>(lambda.size()) != d || work_mask.size() != d) {
    throw DimensionMismatch("ControlModel: coordinate count mismatch");
  }
  std::vector<ComplexMatrix> grad;
  if (hamiltonian_gradient) {
    grad = hamiltonian_gradient(lambda);
  } else {
    grad.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(lambda(i)));
      Coords plus = lambda;
      Coords minus = lambda;
      plus(i) += h;
      minus(i) -= h;
      grad.push_back((hamiltonian(plus).matrix() - hamiltonian(minus).matrix()) / (2.0 * h));
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (!work_mask[i]) grad[i].setZero();
  }
  return grad;
}

void ControlModel::check_work_mask(const Coords& lambda, double h) const {
  for (std::size_t i = 0; i < dimension(); ++i) {
    if (work_mask[i]) continue;
    Coords plus = lambda;
    Coords minus = lambda;
    plus(i) += h;
    minus(i) -= h;
    const double change = (hamiltonian(plus).matrix() - hamiltonian(minus).matrix()).norm() / (2.0 * h);
    if (change > 1e-8) {
      throw ValidationError("ControlModel: coordinate '" + coordinates[i] +
                            "' changes H but is excluded from the work mask");
    }
  }
}

void ControlModel::require_in_domain(const Coords& lambda) const {
  if (in_domain && !in_domain(lambda)) {
    throw ValidationError("ControlModel: point outside the model's valid domain");
  }
}

ControlModel thermal_qubit(double beta) {
  if (!(beta > 0.0)) throw ValidationError("thermal_qubit: beta must be positive");
  ControlModel m;
  m.coordinates = {"omega", "g"};
  m.work_mask = {true, true};
  m.mode = StationaryMode::ThermalGibbs;
  m.hamiltonian = [](const Coords& l) { return quantum::build_hamiltonian(l(0), l(1)); };
  m.hamiltonian_gradient = [](const Coords&) { return qubit_gradient(2); };
  m.inverse_temperature = [beta](const Coords&) { return beta; };
  return m;
}

ControlModel thermal_qubit_with_temperature() {
  ControlModel m;
  m.coordinates = {"omega", "g", "T"};
  m.work_mask = {true, true, false};
  m.mode = StationaryMode::ThermalGibbs;
  m.hamiltonian = [](const Coords& l) { return quantum::build_hamiltonian(l(0), l(1)); };
  m.hamiltonian_gradient = [](const Coords&) { return qubit_gradient(3); };
  m.inverse_temperature = [](const Coords& l) { return 1.0 / l(2); };
  m.in_domain = [](const Coords& l) { return l(2) > 0.0; };
  return m;
}

ControlModel fixed_basis_qubit(double gamma_down, double gamma_up, StationaryMode mode) {
  if (!(gamma_down >= 0.0) || !(gamma_up >= 0.0) || !(gamma_down + gamma_up > 0.0)) {
    throw ValidationError("fixed_basis_qubit: rates must be nonnegative with positive sum");
  }
  if (mode == StationaryMode::ThermalGibbs) {
    throw ValidationError("fixed_basis_qubit: Gibbs mode is not a fixed-basis stationary state");
  }
  ControlModel m;
  m.coordinates = {"omega", "g"};
  m.work_mask = {true, true};
  m.mode = mode;
  m.hamiltonian = [](const Coords& l) { return quantum::build_hamiltonian(l(0), l(1)); };
  m.hamiltonian_gradient = [](const Coords&) { return qubit_gradient(2); };
  m.dissipators = [gamma_down, gamma_up](const Coords&) {
    return quantum::fixed_basis_dissipators(gamma_down, gamma_up);
  };
  m.analytic_bloch = [gamma_down, gamma_up](const Coords& l) {
    return quantum::analytic_ness_bloch(l(0), l(1), gamma_down, gamma_up);
  };
  return m;
}

ControlModel detailed_balance_qubit(double gamma, double beta) {
  if (!(gamma > 0.0) || !(beta >= 0.0)) {
    throw ValidationError("detailed_balance_qubit: need gamma > 0 and beta >= 0");
  }
  ControlModel m;
  m.coordinates = {"omega", "g"};
  m.work_mask = {true, true};
  m.mode = StationaryMode::NullSpace;
  m.hamiltonian = [](const Coords& l) { return quantum::build_hamiltonian(l(0), l(1)); };
  m.hamiltonian_gradient = [](const Coords&) { return qubit_gradient(2); };
  m.dissipators = [gamma, beta](const Coords& l) {
    const HermitianOperator h = quantum::build_hamiltonian(l(0), l(1));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h.matrix());
    const ComplexMatrix& u = es.eigenvectors();
    const ComplexMatrix lower = u.col(0) * u.col(1).adjoint();  // |e> -> |g>
    const RatePair rates = rate_pair_from_p(gamma, thermal_bias_p(beta, epsilon_of(l(0), l(1))));
    return std::vector<LindbladTerm>{LindbladTerm(lower, rates.gamma_down),
                                     LindbladTerm(ComplexMatrix(lower.adjoint()), rates.gamma_up)};
  };
  m.inverse_temperature = [beta](const Coords&) { return beta; };
  return m;
}

WorkOneForm work_one_form(const ControlModel& model, const Coords& lambda) {
  model.require_in_domain(lambda);
  const DensityMatrix rho = model.stationary_state(lambda);
  const auto grad = model.hamiltonian_derivatives(lambda);
  WorkOneForm form;
  form.components.resize(static_cast<Eigen::Index>(grad.size()));
  for (std::size_t i = 0; i < grad.size(); ++i) {
    form.components(static_cast<Eigen::Index>(i)) = quantum::expectation(rho.matrix(), grad[i]);
  }
  return form;
}

namespace {

double curvature_central(const ControlModel& model, const Coords& lambda, std::size_t i, std::size_t j,
                         double h) {
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  Coords p = lambda;
  Coords m = lambda;
  p(ii) += h;
  m(ii) -= h;
  const double d_i_aj = (work_one_form(model, p).components(jj) - work_one_form(model, m).components(jj)) / (2.0 * h);
  p = lambda;
  m = lambda;
  p(jj) += h;
  m(jj) -= h;
  const double d_j_ai = (work_one_form(model, p).components(ii) - work_one_form(model, m).components(ii)) / (2.0 * h);
  return d_i_aj - d_j_ai;
}

}  // namespace

double curvature_fd(const ControlModel& model, const Coords& lambda, std::size_t i, std::size_t j,
                    const CurvatureOptions& options) {
  if (!(options.h >= 1e-9)) throw ValidationError("curvature_fd: step below 1e-9");
  if (i >= model.dimension() || j >= model.dimension()) {
    throw ValidationError("curvature_fd: coordinate index out of range");
  }
  if (i == j) return 0.0;
  const double coarse = curvature_central(model, lambda, i, j, options.h);
  if (!options.richardson) return coarse;
  const double fine = curvature_central(model, lambda, i, j, 0.5 * options.h);
  return (4.0 * fine - coarse) / 3.0;
}

double coherent_curvature_density(double omega, double g, double gamma, double p) {
  const double g2 = g * g;
  const double d = (2.0 * (omega * omega) + g2) + 0.5 * gamma * gamma;
  return (p * (g * (g2 + gamma * gamma))) / (d * d);
}

double thermal_baseline_density(double omega, double g, double beta) {
  const double c = std::cosh(0.5 * beta * epsilon_of(omega, g));
  return 0.25 * beta / (c * c);
}

double free_energy(double omega, double g, double beta) {
  if (!(beta > 0.0)) throw ValidationError("free_energy: beta must be positive");
  const double eps = epsilon_of(omega, g);
  // ln(2 cosh x) = x + log1p(exp(-2x)) for x >= 0.
  return -0.5 * eps - std::log1p(std::exp(-beta * eps)) / beta;
}

double thermal_bias_p(double beta, double epsilon) { return std::tanh(0.5 * beta * epsilon); }

RatePair rate_pair_from_p(double gamma, double p) {
  if (!(gamma > 0.0) || !(std::abs(p) <= 1.0)) {
    throw ValidationError("rate_pair_from_p: need gamma > 0 and |p| <= 1");
  }
  return {0.5 * gamma * (1.0 + p), 0.5 * gamma * (1.0 - p)};
}

double bias_from_rates(double gamma_down, double gamma_up) {
  const double total = gamma_down + gamma_up;
  if (!(total > 0.0)) throw ValidationError("bias_from_rates: total rate must be positive");
  return (gamma_down - gamma_up) / total;
}

const char* curvature_mode_name(CurvatureMode mode) {
  switch (mode) {
    case CurvatureMode::FiniteDifference: return "fd-generic";
    case CurvatureMode::CoherentClosedForm: return "coherent-closed-form";
    case CurvatureMode::ThermalBaseline: return "thermal-baseline";
  }
  return "unknown";
}

CurvatureField CurvatureField::coherent(double gamma, double p) {
  if (!(gamma > 0.0) || !(std::abs(p) <= 1.0)) {
    throw ValidationError("CurvatureField::coherent: need gamma > 0 and |p| <= 1");
  }
  CurvatureField f;
  f.mode_ = CurvatureMode::CoherentClosedForm;
  f.gamma_ = gamma;
  f.p_ = p;
  return f;
}

CurvatureField CurvatureField::coherent_detailed_balance(double gamma, double beta) {
  if (!(gamma > 0.0) || !(beta >= 0.0)) {
    throw ValidationError("CurvatureField::coherent_detailed_balance: need gamma > 0, beta >= 0");
  }
  CurvatureField f;
  f.mode_ = CurvatureMode::CoherentClosedForm;
  f.gamma_ = gamma;
  f.beta_ = beta;
  f.detailed_balance_ = true;
  return f;
}

CurvatureField CurvatureField::thermal_baseline(double beta) {
  if (!(beta > 0.0)) throw ValidationError("CurvatureField::thermal_baseline: beta must be positive");
  CurvatureField f;
  f.mode_ = CurvatureMode::ThermalBaseline;
  f.beta_ = beta;
  return f;
}

CurvatureField CurvatureField::finite_difference(std::shared_ptr<const ControlModel> model, std::size_t i,
                                                 std::size_t j, Coords anchor, CurvatureOptions options) {
  if (!model) throw ValidationError("CurvatureField::finite_difference: null model");
  if (static_cast<std::size_t>(anchor.size()) != model->dimension()) {
    throw DimensionMismatch("CurvatureField::finite_difference: anchor dimension mismatch");
  }
  CurvatureField f;
  f.mode_ = CurvatureMode::FiniteDifference;
  f.model_ = std::move(model);
  f.i_ = i;
  f.j_ = j;
  f.anchor_ = std::move(anchor);
  f.options_ = options;
  return f;
}

const char* CurvatureField::label() const { return curvature_mode_name(mode_); }

double CurvatureField::operator()(double omega, double g) const {
  switch (mode_) {
    case CurvatureMode::CoherentClosedForm: {
      const double p = detailed_balance_ ? thermal_bias_p(beta_, epsilon_of(omega, g)) : p_;
      return coherent_curvature_density(omega, g, gamma_, p);
    }
    case CurvatureMode::ThermalBaseline:
      return thermal_baseline_density(omega, g, beta_);
    case CurvatureMode::FiniteDifference: {
      Coords lambda = anchor_;
      lambda(static_cast<Eigen::Index>(i_)) = omega;
      lambda(static_cast<Eigen::Index>(j_)) = g;
      return curvature_fd(*model_, lambda, i_, j_, options_);
    }
  }
  return 0.0;
}

void CurvatureField::evaluate(std::span<const double> omega, std::span<const double> g,
                              std::span<double> out) const {
  if (omega.size() != g.size() || g.size() != out.size()) {
    throw DimensionMismatch("CurvatureField::evaluate: spans differ in length");
  }
  if (mode_ == CurvatureMode::CoherentClosedForm) {
    std::vector<double> p(out.size(), p_);
    if (detailed_balance_) {
      for (std::size_t k = 0; k < p.size(); ++k) p[k] = thermal_bias_p(beta_, epsilon_of(omega[k], g[k]));
    }
    kernels::coherent_curvature(omega, g, p, gamma_, out);
    return;
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (*this)(omega[k], g[k]);
}

std::vector<ComplexMatrix> stationary_derivatives(const ControlModel& model, const Coords& lambda, double h) {
  std::vector<ComplexMatrix> out;
  out.reserve(model.dimension());
  for (std::size_t i = 0; i < model.dimension(); ++i) {
    const double step = h * std::max(1.0, std::abs(lambda(static_cast<Eigen::Index>(i))));
    Coords p = lambda;
    Coords m = lambda;
    p(static_cast<Eigen::Index>(i)) += step;
    m(static_cast<Eigen::Index>(i)) -= step;
    model.require_in_domain(p);
    model.require_in_domain(m);
    out.push_back((model.stationary_state(p).matrix() - model.stationary_state(m).matrix()) / (2.0 * step));
  }
  return out;
}

namespace {

// L_perp^{-1} applied to each d rho*/d lambda^j, with trace residue projected out.
struct ResponseData {
  std::vector<ComplexMatrix> d_rho;
  std::vector<ComplexMatrix> response;
};

ResponseData response_data(const ControlModel& model, const Coords& lambda, double h) {
  model.require_in_domain(lambda);
  const quantum::Superoperator l = model.liouvillian(lambda);
  const DensityMatrix rho = quantum::stationary_state(l);
  ResponseData data;
  data.d_rho = stationary_derivatives(model, lambda, h);
  for (auto& d : data.d_rho) {
    d -= d.trace() * rho.matrix();
    data.response.push_back(quantum::reduced_pseudoinverse_apply(l, rho, d));
  }
  return data;
}

}  // namespace

DissipationMetric dissipation_metric(const ControlModel& model, const Coords& lambda, double h) {
  const ResponseData data = response_data(model, lambda, h);
  const auto grad = model.hamiltonian_derivatives(lambda);
  const auto d = static_cast<Eigen::Index>(model.dimension());
  Eigen::MatrixXd raw(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      raw(i, j) = (grad[static_cast<std::size_t>(i)] * data.response[static_cast<std::size_t>(j)]).trace().real();
    }
  }
  return finalize(std::move(raw));
}

DissipationMetric state_response_metric(const ControlModel& model, const Coords& lambda, double h) {
  const ResponseData data = response_data(model, lambda, h);
  const auto d = static_cast<Eigen::Index>(model.dimension());
  Eigen::MatrixXd raw(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      raw(i, j) =
          -(data.d_rho[static_cast<std::size_t>(i)] * data.response[static_cast<std::size_t>(j)]).trace().real();
    }
  }
  return finalize(std::move(raw));
}

}  // namespace curvwork::geometry
