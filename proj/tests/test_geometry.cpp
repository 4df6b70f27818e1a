#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvwork/errors.hpp"
#include "curvwork/geometry.hpp"

#include <cmath>
#include <memory>

using namespace curvwork;
using namespace curvwork::geometry;

namespace {

Coords at(double a, double b) {
  Coords c(2);
  c << a, b;
  return c;
}

Coords at(double a, double b, double t) {
  Coords c(3);
  c << a, b, t;
  return c;
}

}  // namespace

TEST_CASE("thermal one-form is the gradient of the free energy") {
  const double beta = 1.7;
  const auto model = thermal_qubit(beta);
  for (auto [w, g] : {std::pair{1.0, 0.5}, std::pair{-0.3, 1.2}, std::pair{0.8, -0.9}}) {
    const auto a = work_one_form(model, at(w, g)).components;
    const double eps = std::hypot(w, g);
    const double t = std::tanh(0.5 * beta * eps);
    CHECK(a(0) == doctest::Approx(-0.5 * t * w / eps).epsilon(1e-13));
    CHECK(a(1) == doctest::Approx(-0.5 * t * g / eps).epsilon(1e-13));
    const double h = 1e-5;
    const double dfw = (free_energy(w + h, g, beta) - free_energy(w - h, g, beta)) / (2 * h);
    CHECK(a(0) == doctest::Approx(dfw).epsilon(1e-8));
  }
}

TEST_CASE("thermal curvature of the exact Gibbs state vanishes") {
  const auto model = thermal_qubit(1.0);
  for (auto [w, g] : {std::pair{1.0, 0.5}, std::pair{0.2, -1.4}}) {
    CHECK(std::abs(curvature_fd(model, at(w, g), 0, 1)) < 1e-8);
  }
  // The baseline density is not zero at the same points.
  CHECK(thermal_baseline_density(1.0, 0.5, 1.0) > 0.1);
}

TEST_CASE("coherent curvature oracle at (0, 1)") {
  CHECK(coherent_curvature_density(0.0, 1.0, 1.0, 1.0) == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  const auto model = fixed_basis_qubit(1.0, 0.0);
  CHECK(curvature_fd(model, at(0.0, 1.0), 0, 1) == doctest::Approx(8.0 / 9.0).epsilon(1e-7));
}

TEST_CASE("finite-difference curvature through the solver matches the closed form") {
  for (auto [gd, gu] : {std::pair{1.0, 0.0}, std::pair{1.0, 0.3}, std::pair{0.4, 0.9}}) {
    const auto model = fixed_basis_qubit(gd, gu);
    const double gamma = gd + gu;
    const double p = bias_from_rates(gd, gu);
    for (auto [w, g] : {std::pair{0.5, 0.7}, std::pair{-1.5, 1.9}, std::pair{1.1, -0.4}}) {
      const double fd = curvature_fd(model, at(w, g), 0, 1);
      CHECK(fd == doctest::Approx(coherent_curvature_density(w, g, gamma, p)).epsilon(1e-6));
    }
  }
}

TEST_CASE("curvature is antisymmetric and zero on the diagonal") {
  const auto model = fixed_basis_qubit(1.0, 0.2);
  const double a = curvature_fd(model, at(0.4, 0.9), 0, 1);
  CHECK(curvature_fd(model, at(0.4, 0.9), 1, 0) == -a);
  CHECK(curvature_fd(model, at(0.4, 0.9), 0, 0) == 0.0);
}

TEST_CASE("richardson extrapolation reduces the truncation error") {
  const auto model = fixed_basis_qubit(1.0, 0.0, StationaryMode::AnalyticFixedBasis);
  const double exact = coherent_curvature_density(0.3, 0.6, 1.0, 1.0);
  const double plain = curvature_fd(model, at(0.3, 0.6), 0, 1, {1e-2, false});
  const double rich = curvature_fd(model, at(0.3, 0.6), 0, 1, {1e-2, true});
  CHECK(std::abs(rich - exact) < 0.05 * std::abs(plain - exact));
}

TEST_CASE("tiny steps are rejected") {
  const auto model = fixed_basis_qubit(1.0, 0.0);
  CHECK_THROWS_AS(curvature_fd(model, at(0.3, 0.6), 0, 1, {1e-10, false}), ValidationError);
}

TEST_CASE("work mask excludes the temperature coordinate") {
  const auto model = thermal_qubit_with_temperature();
  CHECK_NOTHROW(model.check_work_mask(at(1.0, 0.5, 0.7)));
  const auto grad = model.hamiltonian_derivatives(at(1.0, 0.5, 0.7));
  CHECK(grad[2].norm() == 0.0);
  CHECK_THROWS_AS(model.require_in_domain(at(1.0, 0.5, -0.1)), ValidationError);

  auto leaky = model;
  leaky.hamiltonian = [](const Coords& l) { return quantum::build_hamiltonian(l(0) * l(2), l(1)); };
  CHECK_THROWS_AS(leaky.check_work_mask(at(1.0, 0.5, 0.7)), ValidationError);
}

TEST_CASE("detailed-balance qubit relaxes to the Gibbs state") {
  const double beta = 1.3;
  const auto model = detailed_balance_qubit(0.8, beta);
  const auto rho = model.stationary_state(at(0.6, -0.7));
  const auto gibbs = quantum::gibbs_state(quantum::build_hamiltonian(0.6, -0.7), beta);
  CHECK((rho.matrix() - gibbs.matrix()).norm() < 1e-10);
}

TEST_CASE("friction tensor is positive semidefinite for energy-aligned dissipation") {
  const auto model = detailed_balance_qubit(1.0, 1.0);
  for (auto [w, g] : {std::pair{1.0, 0.5}, std::pair{-0.4, 1.2}, std::pair{0.3, -0.2}, std::pair{2.0, 0.0}}) {
    const auto m = dissipation_metric(model, at(w, g));
    CHECK(m.positive_semidefinite());
    CHECK(m.asymmetry < 1e-6);
  }
}

TEST_CASE("friction tensor of the fixed-basis model reports its indefiniteness") {
  const auto model = fixed_basis_qubit(1.0, 0.0);
  double lowest = 0.0;
  for (double w : {-1.5, -0.5, 0.5, 1.5}) {
    for (double g : {-1.0, 0.5, 1.5}) lowest = std::min(lowest, dissipation_metric(model, at(w, g)).min_eigenvalue);
  }
  CHECK(lowest < 0.0);
}

TEST_CASE("friction tensor scales as 1/rate where the stationary state is rate independent") {
  const double base = dissipation_metric(detailed_balance_qubit(1.0, 1.0), at(1.2, 0.0)).tensor(0, 0);
  for (double c : {2.0, 5.0}) {
    const double scaled = dissipation_metric(detailed_balance_qubit(c, 1.0), at(1.2, 0.0)).tensor(0, 0);
    CHECK(scaled == doctest::Approx(base / c).epsilon(1e-6));
  }
  CHECK(base > 0.0);
}

TEST_CASE("state response metric is positive semidefinite") {
  const auto model = detailed_balance_qubit(1.0, 2.0);
  const auto m = state_response_metric(model, at(0.7, 0.4));
  CHECK(m.positive_semidefinite());
}

TEST_CASE("thermal baseline depends only on the energy scale") {
  const auto f = CurvatureField::thermal_baseline(2.0);
  CHECK(f(0.0, 0.0) == doctest::Approx(0.5));
  CHECK(f(0.6, 0.8) == doctest::Approx(f(1.0, 0.0)).epsilon(1e-15));
  CHECK(f(0.6, 0.8) == doctest::Approx(f(-0.8, -0.6)).epsilon(1e-15));
  CHECK(std::string(f.label()) == "thermal-baseline");
}

TEST_CASE("coherent field is odd in g") {
  const auto f = CurvatureField::coherent(1.0, 0.7);
  CHECK(f(0.4, 0.9) == -f(0.4, -0.9));
  const auto db = CurvatureField::coherent_detailed_balance(1.0, 1.5);
  CHECK(db(0.4, 0.9) == -db(0.4, -0.9));
}

TEST_CASE("batched evaluation agrees with pointwise evaluation") {
  const std::vector<double> om = {0.1, -0.7, 1.3, 2.0, 0.0};
  const std::vector<double> g = {0.5, 1.1, -0.2, 0.0, 1.0};
  std::vector<double> out(om.size());
  for (const auto& f : {CurvatureField::coherent(1.0, 0.4), CurvatureField::coherent_detailed_balance(0.5, 2.0),
                        CurvatureField::thermal_baseline(1.0)}) {
    f.evaluate(om, g, out);
    for (std::size_t k = 0; k < om.size(); ++k) CHECK(out[k] == doctest::Approx(f(om[k], g[k])).epsilon(1e-15));
  }
  std::vector<double> short_out(2);
  CHECK_THROWS_AS(CurvatureField::coherent(1.0, 1.0).evaluate(om, g, short_out), DimensionMismatch);
}

TEST_CASE("finite-difference field through a generic model") {
  auto model = std::make_shared<const ControlModel>(fixed_basis_qubit(1.0, 0.0));
  const auto f = CurvatureField::finite_difference(model, 0, 1, Coords::Zero(2));
  CHECK(f(0.5, 0.5) == doctest::Approx(coherent_curvature_density(0.5, 0.5, 1.0, 1.0)).epsilon(1e-6));
  CHECK(std::string(f.label()) == "fd-generic");
}

TEST_CASE("free energy is stable for large beta eps") {
  CHECK(free_energy(400.0, 0.0, 50.0) == doctest::Approx(-200.0));
  CHECK(free_energy(1.0, 0.0, 1.0) == doctest::Approx(-std::log(2.0 * std::cosh(0.5))).epsilon(1e-14));
  CHECK_THROWS_AS(free_energy(1.0, 0.0, 0.0), ValidationError);
}

TEST_CASE("rate parametrization round trip") {
  const auto r = rate_pair_from_p(2.0, 0.25);
  CHECK(r.gamma_down == doctest::Approx(1.25));
  CHECK(r.gamma_up == doctest::Approx(0.75));
  CHECK(bias_from_rates(r.gamma_down, r.gamma_up) == doctest::Approx(0.25));
  CHECK_THROWS_AS(rate_pair_from_p(1.0, 1.5), ValidationError);
  CHECK_THROWS_AS(fixed_basis_qubit(-1.0, 0.5), ValidationError);
}
