#include "curvwork/quantum_core.hpp"

#include "curvwork/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace curvwork::quantum {
namespace {

constexpr double kHermitianTolerance = 1e-12;
constexpr double kTraceTolerance = 1e-12;

double max_hermitian_defect(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix hermitize(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

double min_eigenvalue(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

HermitianOperator::HermitianOperator(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw ValidationError("HermitianOperator: matrix must be square and nonempty");
  }
  if (max_hermitian_defect(m_) > kHermitianTolerance) {
    throw ValidationError("HermitianOperator: matrix is not Hermitian");
  }
}

HermitianOperator HermitianOperator::zero(int dim) {
  return HermitianOperator(ComplexMatrix::Zero(dim, dim));
}

DensityMatrix::DensityMatrix(ComplexMatrix m, double positivity_tolerance) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw ValidationError("DensityMatrix: matrix must be square and nonempty");
  }
  if (max_hermitian_defect(m_) > kHermitianTolerance) {
    throw ValidationError("DensityMatrix: matrix is not Hermitian");
  }
  if (std::abs(m_.trace() - Complex(1.0, 0.0)) > kTraceTolerance) {
    throw ValidationError("DensityMatrix: trace differs from one");
  }
  if (min_eigenvalue(m_) < -positivity_tolerance) {
    throw NonPositiveState("DensityMatrix: negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

LindbladTerm::LindbladTerm(ComplexMatrix jump_operator, double r) : jump(std::move(jump_operator)), rate(r) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw ValidationError("LindbladTerm: rate must be finite and nonnegative");
  }
  if (jump.rows() != jump.cols()) {
    throw DimensionMismatch("LindbladTerm: jump operator must be square");
  }
}

Superoperator::Superoperator(ComplexMatrix m, int dim) : m_(std::move(m)), dim_(dim) {
  if (m_.rows() != dim * dim || m_.cols() != dim * dim) {
    throw DimensionMismatch("Superoperator: matrix must be dim^2 x dim^2");
  }
}

ComplexMatrix Superoperator::apply(const ComplexMatrix& op) const {
  if (op.rows() != dim_ || op.cols() != dim_) {
    throw DimensionMismatch("Superoperator::apply: operator dimension mismatch");
  }
  return unvectorize(m_ * vectorize(op), dim_);
}

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << Complex(0.0, 0.0), Complex(0.0, -1.0), Complex(0.0, 1.0), Complex(0.0, 0.0);
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

ComplexMatrix sigma_minus() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 0.0, 0.0;
  return m;
}

ComplexMatrix sigma_plus() { return sigma_minus().adjoint(); }

ComplexVector vectorize(const ComplexMatrix& op) {
  return Eigen::Map<const ComplexVector>(op.data(), op.size());
}

ComplexMatrix unvectorize(const ComplexVector& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim) {
    throw DimensionMismatch("unvectorize: length is not dim^2");
  }
  return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

double expectation(const ComplexMatrix& rho, const ComplexMatrix& op) {
  return (rho * op).trace().real();
}

HermitianOperator build_hamiltonian(double omega, double g) {
  return HermitianOperator(0.5 * (omega * pauli_z() + g * pauli_x()));
}

DensityMatrix gibbs_state(const HermitianOperator& h, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ValidationError("gibbs_state: beta must be finite and nonnegative");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h.matrix());
  const Eigen::VectorXd& energies = es.eigenvalues();
  const double e_min = energies.minCoeff();
  Eigen::VectorXd weights = (-beta * (energies.array() - e_min)).exp();
  weights /= weights.sum();
  const ComplexMatrix& u = es.eigenvectors();
  ComplexMatrix rho = u * weights.cast<Complex>().asDiagonal() * u.adjoint();
  return DensityMatrix(hermitize(rho));
}

Superoperator build_liouvillian(const HermitianOperator& h, const std::vector<LindbladTerm>& terms) {
  const int n = h.dim();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const Complex i_unit(0.0, 1.0);
  const ComplexMatrix& hm = h.matrix();
  ComplexMatrix l = -i_unit * (kron(id, hm) - kron(hm.transpose(), id));
  for (const auto& term : terms) {
    if (term.jump.rows() != n) {
      throw DimensionMismatch("build_liouvillian: jump operator dimension differs from H");
    }
    if (term.rate == 0.0) continue;
    const ComplexMatrix& j = term.jump;
    const ComplexMatrix jdj = j.adjoint() * j;
    l += term.rate * (kron(j.conjugate(), j) - 0.5 * kron(id, jdj) - 0.5 * kron(jdj.transpose(), id));
  }
  return Superoperator(std::move(l), n);
}

DensityMatrix stationary_state(const Superoperator& l) {
  const int n = l.dim();
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
  Eigen::JacobiSVD<ComplexMatrix> svd(l.matrix(), Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double scale = s(0);
  if (scale == 0.0) {
    throw DegenerateSteadyState("stationary_state: generator is identically zero");
  }
  if (nn > 1 && (s(nn - 2) - s(nn - 1)) / scale < 1e-8) {
    throw DegenerateSteadyState("stationary_state: null space is not one-dimensional");
  }
  ComplexMatrix rho = unvectorize(svd.matrixV().col(nn - 1), n);
  const Complex tr = rho.trace();
  if (std::abs(tr) < 1e-300) {
    throw NumericalError("stationary_state: null vector is traceless");
  }
  rho /= tr;
  rho = hermitize(rho);
  rho /= rho.trace().real();
  if (min_eigenvalue(rho) < -1e-8) {
    throw NonPositiveState("stationary_state: null vector is not a positive operator");
  }
  const double residual = l.apply(rho).norm();
  if (residual > 1e-10 * std::max(1.0, scale)) {
    throw NumericalError("stationary_state: residual " + std::to_string(residual) + " too large");
  }
  return DensityMatrix(std::move(rho), 1e-8);
}

double spectral_gap(const Superoperator& l) {
  Eigen::ComplexEigenSolver<ComplexMatrix> es(l.matrix(), false);
  std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) { return std::abs(a) < std::abs(b); });
  const double scale = std::abs(ev.back());
  if (scale == 0.0 || std::abs(ev[1]) <= 1e-8 * scale) {
    throw DegenerateSteadyState("spectral_gap: zero eigenvalue is degenerate");
  }
  double gap = std::abs(ev[1].real());
  for (std::size_t k = 2; k < ev.size(); ++k) gap = std::min(gap, std::abs(ev[k].real()));
  return gap;
}

ComplexMatrix reduced_pseudoinverse_apply(const Superoperator& l, const DensityMatrix& rho_star,
                                          const ComplexMatrix& x) {
  const int n = l.dim();
  if (x.rows() != n || x.cols() != n || rho_star.dim() != n) {
    throw DimensionMismatch("reduced_pseudoinverse_apply: dimension mismatch");
  }
  const double x_scale = std::max(1.0, x.norm());
  if (std::abs(x.trace()) > 1e-10 * x_scale) {
    throw ValidationError("reduced_pseudoinverse_apply: X must be traceless");
  }
  if (x.norm() == 0.0) return ComplexMatrix::Zero(n, n);
  if (spectral_gap(l) < 1e-10) {
    throw SingularSolve("reduced_pseudoinverse_apply: spectral gap below 1e-10");
  }

  // Bordered system [L rho*; tr 0] [y; mu] = [x; 0]. mu vanishes because
  // the image of L is traceless.
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
  ComplexMatrix bordered = ComplexMatrix::Zero(nn + 1, nn + 1);
  bordered.topLeftCorner(nn, nn) = l.matrix();
  bordered.block(0, nn, nn, 1) = vectorize(rho_star.matrix());
  bordered.block(nn, 0, 1, nn) = vectorize(ComplexMatrix::Identity(n, n)).transpose();
  ComplexVector rhs = ComplexVector::Zero(nn + 1);
  rhs.head(nn) = vectorize(x);
  const ComplexVector sol = bordered.fullPivLu().solve(rhs);

  ComplexMatrix y = unvectorize(sol.head(nn), n);
  if (max_hermitian_defect(x) <= 1e-12 * x_scale) y = hermitize(y);
  const double residual = (l.apply(y) - x).norm();
  if (!std::isfinite(residual) || residual > 1e-9 * x_scale) {
    throw SingularSolve("reduced_pseudoinverse_apply: back-substitution residual too large");
  }
  return y;
}

BlochVector bloch_from_density(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw DimensionMismatch("bloch_from_density: dim must be 2");
  const ComplexMatrix& m = rho.matrix();
  return {expectation(m, pauli_x()), expectation(m, pauli_y()), expectation(m, pauli_z())};
}

DensityMatrix density_from_bloch(const BlochVector& r) {
  ComplexMatrix m =
      0.5 * (ComplexMatrix::Identity(2, 2) + r.x * pauli_x() + r.y * pauli_y() + r.z * pauli_z());
  return DensityMatrix(std::move(m));
}

BlochVector analytic_ness_bloch(double omega, double g, double gamma_down, double gamma_up) {
  const double gamma = gamma_down + gamma_up;
  if (!(gamma > 0.0)) {
    throw ValidationError("analytic_ness_bloch: total rate must be positive");
  }
  const double s = gamma_down - gamma_up;
  const double d = 2.0 * omega * omega + g * g + 0.5 * gamma * gamma;
  return {2.0 * s * omega * g / (gamma * d), -s * g / d,
          s * (4.0 * omega * omega + gamma * gamma) / (2.0 * gamma * d)};
}

std::vector<LindbladTerm> fixed_basis_dissipators(double gamma_down, double gamma_up) {
  return {LindbladTerm(sigma_minus(), gamma_down), LindbladTerm(sigma_plus(), gamma_up)};
}

}  // namespace curvwork::quantum
