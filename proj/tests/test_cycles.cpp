#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvwork/cycles.hpp"
#include "curvwork/errors.hpp"

#include <cmath>
#include <numbers>

using namespace curvwork;
using namespace curvwork::cycles;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Coords at(double a, double b) {
  Coords c(2);
  c << a, b;
  return c;
}

geometry::ControlModel coherent_model() {
  return geometry::fixed_basis_qubit(1.0, 0.0, geometry::StationaryMode::AnalyticFixedBasis);
}

}  // namespace

TEST_CASE("protocol tangents are derivatives of the points") {
  const std::vector<Protocol> ps = {Protocol::circle(1.0, 0.5, 0.3), Protocol::offset_ellipse(0.2, -0.4, 0.5, 0.2),
                                    Protocol::temperature_modulated(1.0, 0.5, 0.8, 0.4, 1.0, 0.2, 0.7),
                                    Protocol::circle(1.0, 0.5, 0.3).reversed()};
  for (const auto& p : ps) {
    for (double t : {0.3, 1.9, 4.4}) {
      const double h = 1e-6;
      const Coords fd = (p.point(t + h) - p.point(t - h)) / (2 * h);
      CHECK((fd - p.tangent(t)).norm() < 1e-8);
    }
  }
}

TEST_CASE("reversed protocol traverses the same points backwards") {
  const auto p = Protocol::offset_ellipse(0.2, -0.4, 0.5, 0.2);
  const auto r = p.reversed();
  CHECK((r.point(0.7) - p.point(kTwoPi - 0.7)).norm() == 0.0);
  CHECK(r.reversed_direction());
  CHECK(!r.reversed().reversed_direction());
}

TEST_CASE("protocol validation") {
  CHECK_THROWS_AS(Protocol::circle(0, 0, 0.0), ValidationError);
  CHECK_THROWS_AS(Protocol::temperature_modulated(1, 0, 1, 1, 0.5, 0.5, 0), ValidationError);
  CHECK_THROWS_AS(Protocol::piecewise_linear({at(0, 0), at(1, 0)}, true), ValidationError);
  CHECK_THROWS_AS(Protocol::piecewise_linear({at(0, 0), Coords::Zero(3)}, false), DimensionMismatch);
  CHECK_THROWS_AS(line_integral_work(coherent_model(), Protocol::temperature_modulated(1, 0, 1, 1, 1, 0.5, 0)),
                  DimensionMismatch);
}

TEST_CASE("piecewise-linear segments share the parameter interval") {
  const auto p = Protocol::piecewise_linear({at(0, 0), at(1, 0), at(1, 1), at(0, 1)}, true);
  CHECK(p.segment_count() == 4);
  CHECK((p.point(kTwoPi / 8) - at(0.5, 0)).norm() < 1e-15);
  CHECK((p.point(3 * kTwoPi / 8) - at(1, 0.5)).norm() < 1e-15);
  CHECK((p.tangent(3 * kTwoPi / 8) - at(0, 4 / kTwoPi)).norm() < 1e-15);
}

TEST_CASE("line and surface work agree for the offset coherent loop") {
  const auto res = stokes_check(coherent_model(), Protocol::circle(1.0, 1.0, 0.5), geometry::CurvatureField::coherent(1.0, 1.0));
  CHECK(std::abs(res.gap()) < 1e-9);
  CHECK(res.w_line > 0.1);
}

TEST_CASE("reversal negates the cycle work") {
  const auto model = coherent_model();
  const auto p = Protocol::offset_ellipse(0.5, 0.8, 0.6, 0.3);
  const double w = line_integral_work(model, p).value;
  const double wr = line_integral_work(model, p.reversed()).value;
  CHECK(std::abs(w + wr) < 1e-13 * std::abs(w));
  const auto res = stokes_check(model, p.reversed(), geometry::CurvatureField::coherent(1.0, 1.0));
  CHECK(res.w_surface == doctest::Approx(-w).epsilon(1e-9));
}

TEST_CASE("polygon loops satisfy Stokes") {
  const auto model = coherent_model();
  const auto p = Protocol::piecewise_linear({at(0.2, 0.3), at(1.2, 0.4), at(1.0, 1.3), at(0.1, 1.0)}, true);
  LineOptions line;
  line.nodes = 1024;
  SurfaceOptions surf;
  surf.radial = 32;
  surf.tolerance = 1e-7;
  surf.max_doublings = 4;
  const auto res = stokes_check(model, p, geometry::CurvatureField::coherent(1.0, 1.0), line, surf);
  CHECK(std::abs(res.gap()) < 1e-6);
}

TEST_CASE("open thermal path work equals the free-energy difference") {
  const double beta = 2.0;
  const auto model = geometry::thermal_qubit(beta);
  const auto p = Protocol::piecewise_linear({at(0.5, 0.2), at(1.0, 1.1), at(1.5, 0.3)}, false);
  const double w = line_integral_work(model, p).value;
  CHECK(w == doctest::Approx(geometry::free_energy(1.5, 0.3, beta) - geometry::free_energy(0.5, 0.2, beta)).epsilon(1e-10));
}

TEST_CASE("custom protocol") {
  const auto p = Protocol::custom([](double t) { return at(1.0 + 0.5 * std::cos(t), 1.0 + 0.5 * std::sin(t)); },
                                  [](double t) { return at(-0.5 * std::sin(t), 0.5 * std::cos(t)); }, true);
  const auto model = coherent_model();
  CHECK(line_integral_work(model, p).value ==
        doctest::Approx(line_integral_work(model, Protocol::circle(1.0, 1.0, 0.5)).value).epsilon(1e-14));
}

TEST_CASE("line integral convergence is checked") {
  LineOptions opt;
  opt.nodes = 16;
  opt.tolerance = 1e-15;
  CHECK_THROWS_AS(line_integral_work(coherent_model(), Protocol::circle(0.2, 0.3, 1.5), opt), NonConvergence);
  opt.check_convergence = false;
  CHECK_NOTHROW(line_integral_work(coherent_model(), Protocol::circle(0.2, 0.3, 1.5), opt));
}

TEST_CASE("surface quadrature") {
  const auto f = geometry::CurvatureField::coherent(1.0, 1.0);
  CHECK(surface_integral_work(f, Disk{1.0, 1.0, 0.0}).value == 0.0);
  CHECK_THROWS_AS(surface_integral_work(f, Disk{1.0, 1.0, -1.0}), ValidationError);
  SurfaceOptions strict;
  strict.radial = 4;
  strict.angular = 8;
  strict.tolerance = 1e-16;
  strict.max_doublings = 0;
  CHECK_THROWS_AS(surface_integral_work(f, Disk{0.5, 0.5, 2.0}, strict), UnresolvedIntegrand);
  // Polygon orientation sets the sign.
  Polygon ccw{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  Polygon cw{{{0, 1}, {1, 1}, {1, 0}, {0, 0}}};
  const double a = surface_integral_work(f, ccw).value;
  CHECK(surface_integral_work(f, cw).value == doctest::Approx(-a));
}

TEST_CASE("baseline total flux") {
  for (double beta : {1.0, 2.0, 4.0}) {
    CHECK(beta * thermal_total_flux(beta) == doctest::Approx(kTwoPi * std::log(2.0)).epsilon(1e-9));
  }
}

TEST_CASE("radius sweep is monotone and validated") {
  const std::vector<double> radii = {0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  const auto s = radius_sweep(1.0, radii);
  for (std::size_t k = 1; k < s.rows.size(); ++k) CHECK(s.rows[k].normalized > s.rows[k - 1].normalized);
  CHECK(s.rows.back().normalized == doctest::Approx(1.0).epsilon(1e-5));
  const std::vector<double> bad = {1.0, 0.5};
  CHECK_THROWS_AS(radius_sweep(1.0, bad), ValidationError);
}

TEST_CASE("sinusoid fit recovers a known curve") {
  std::vector<double> phi, w;
  for (int k = 0; k < 12; ++k) {
    phi.push_back(kTwoPi * k / 12);
    w.push_back(0.3 + 0.7 * std::cos(phi.back() + 0.4));
  }
  const auto f = fit_sinusoid(phi, w);
  CHECK(f.offset == doctest::Approx(0.3));
  CHECK(f.amplitude == doctest::Approx(0.7));
  CHECK(f.phase == doctest::Approx(0.4));
  CHECK(f.max_residual < 1e-12);
}

TEST_CASE("phase sweep flattens without temperature modulation") {
  std::vector<double> phis;
  for (int k = 0; k < 8; ++k) phis.push_back(kTwoPi * k / 8);
  const auto flat = phase_sweep({1.0, 0.5, 0.8, 0.4, 1.0, 0.0}, phis);
  CHECK(flat.fit.amplitude < 1e-9);
  const auto live = phase_sweep({1.0, 0.5, 0.8, 0.4, 1.0, 0.05}, phis, {}, 2);
  CHECK(live.fit.amplitude > 1e-3);
}

TEST_CASE("symmetric loops cancel exactly") {
  const auto rep = eta_geom(Disk{0.8, 0.0, 0.5}, {1.0, 1.0, true, 1.0});
  CHECK(rep.w_coh == 0.0);
  CHECK(rep.eta == 0.0);
  CHECK_THROWS_AS(eta_geom(Disk{0.8, 0.5, 0.0}, {1.0, 1.0, true, 1.0}), ZeroBaseline);
}

TEST_CASE("small-cycle eta matches the sinh formula") {
  for (double g0 : {0.5, 1.0, 1.5}) {
    const auto rep = eta_geom(Disk{0.5, g0, 0.05}, {1.0, 1.0, true, 1.0});
    CHECK(rep.eta == doctest::Approx(eta_small_cycle(0.5, g0, 1.0, 1.0)).epsilon(0.02));
    CHECK(rep.local == doctest::Approx(eta_small_cycle(0.5, g0, 1.0, 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("first-law bookkeeping closes step by step") {
  const auto t = first_law_trace(coherent_model(), Protocol::circle(1.0, 1.0, 0.5), 200);
  CHECK(t.max_step_residual < 1e-15);
  CHECK(std::abs(t.sum_du) < 1e-14);
  CHECK(t.sum_dw == doctest::Approx(-t.sum_dq).epsilon(1e-12));
  const auto thermal = first_law_trace(geometry::thermal_qubit(1.0), Protocol::circle(1.0, 1.0, 0.5), 200);
  CHECK(std::abs(thermal.sum_dw) < 1e-4);
}

TEST_CASE("finite-rate work approaches the geometric work") {
  const auto model = coherent_model();
  const auto p = Protocol::circle(1.0, 1.0, 0.5);
  const auto fast = finite_rate_cycle_work(model, p, 20.0);
  const auto slow = finite_rate_cycle_work(model, p, 40.0);
  CHECK(std::abs(slow.excess_work) < std::abs(fast.excess_work));
  CHECK(slow.predicted_dissipation == doctest::Approx(0.5 * fast.predicted_dissipation).epsilon(1e-12));
  CHECK_THROWS_AS(finite_rate_cycle_work(model, p, -1.0), ValidationError);
}
