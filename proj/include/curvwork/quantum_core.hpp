#pragma once

// Dense operator algebra for small open quantum systems: Lindblad generators,
// stationary states, spectral gaps and the pseudo-inverse on the traceless
// subspace.
//
// Conventions: hbar = k_B = 1, beta = 1/T. Superoperators act on
// column-stacked operators, vec(A rho B) = (B^T kron A) vec(rho).

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace curvwork::quantum {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Self-adjoint operator (Hamiltonians, generators G_i = dH/dlambda^i).
class HermitianOperator {
 public:
  /// Throws ValidationError unless `m` is square and Hermitian to 1e-12.
  explicit HermitianOperator(ComplexMatrix m);

  static HermitianOperator zero(int dim);

  const ComplexMatrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  ComplexMatrix m_;
};

/// Hermitian, unit-trace, positive semidefinite operator.
class DensityMatrix {
 public:
  /// Validates Hermiticity (1e-12), trace (1e-12) and min eigenvalue
  /// (>= -positivity_tolerance).
  explicit DensityMatrix(ComplexMatrix m, double positivity_tolerance = 1e-10);

  static DensityMatrix maximally_mixed(int dim);

  const ComplexMatrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  ComplexMatrix m_;
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
};

struct LindbladTerm {
  ComplexMatrix jump;
  double rate = 0.0;

  /// Throws ValidationError for negative or non-finite rates.
  LindbladTerm(ComplexMatrix jump_operator, double rate);
};

/// Linear map on vectorized dim x dim operators.
class Superoperator {
 public:
  Superoperator(ComplexMatrix m, int dim);

  ComplexMatrix apply(const ComplexMatrix& op) const;

  const ComplexMatrix& matrix() const { return m_; }
  int dim() const { return dim_; }

 private:
  ComplexMatrix m_;
  int dim_;
};

// Qubit operators. Basis index 0 is the sigma_z = +1 state.
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();
/// sigma_-: moves population into the sigma_z = +1 pointer state, |0><1|.
ComplexMatrix sigma_minus();
/// sigma_+ = sigma_-^dagger.
ComplexMatrix sigma_plus();

ComplexVector vectorize(const ComplexMatrix& op);
ComplexMatrix unvectorize(const ComplexVector& v, int dim);

/// Re Tr[rho O].
double expectation(const ComplexMatrix& rho, const ComplexMatrix& op);

/// H(omega, g) = (omega sigma_z + g sigma_x) / 2.
HermitianOperator build_hamiltonian(double omega, double g);

/// exp(-beta H) / Z via the spectral decomposition of H, shifted by the
/// smallest eigenvalue before exponentiation.
DensityMatrix gibbs_state(const HermitianOperator& h, double beta);

/// rho -> -i[H, rho] + sum_k rate_k (L rho L^dag - {L^dag L, rho}/2).
Superoperator build_liouvillian(const HermitianOperator& h, const std::vector<LindbladTerm>& terms);

/// Null vector of L taken as the right-singular vector of the smallest
/// singular value of the norm-scaled generator.
///
/// Throws DegenerateSteadyState when the two smallest singular values are
/// within 1e-8, NonPositiveState when the Hermitized, trace-normalized
/// result has an eigenvalue below -1e-8, and NumericalError when the
/// residual ||L[rho]||_F exceeds 1e-10.
DensityMatrix stationary_state(const Superoperator& l);

/// Smallest |Re(lambda)| over the nonzero eigenvalues of L.
double spectral_gap(const Superoperator& l);

/// Solves L[Y] = X with Tr[Y] = 0 (so P[Y] = rho* Tr[Y] = 0) for traceless X.
/// The result is Hermitized when X is Hermitian.
ComplexMatrix reduced_pseudoinverse_apply(const Superoperator& l, const DensityMatrix& rho_star,
                                          const ComplexMatrix& x);

BlochVector bloch_from_density(const DensityMatrix& rho);
DensityMatrix density_from_bloch(const BlochVector& r);

/// Closed-form stationary Bloch vector of the fixed-basis qubit model with
/// D = 2 omega^2 + g^2 + gamma^2/2, gamma = gd + gu, s = gd - gu.
BlochVector analytic_ness_bloch(double omega, double g, double gamma_down, double gamma_up);

/// The fixed-basis qubit dissipators {sigma_- at gamma_down, sigma_+ at gamma_up}.
std::vector<LindbladTerm> fixed_basis_dissipators(double gamma_down, double gamma_up);

}  // namespace curvwork::quantum
