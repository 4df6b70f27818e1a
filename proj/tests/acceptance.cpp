// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. All tolerances are fixed here.

#include "curvwork/cli/selfcheck.hpp"
#include "curvwork/cycles.hpp"
#include "curvwork/errors.hpp"
#include "curvwork/geometry.hpp"
#include "curvwork/parallel.hpp"
#include "curvwork/quantum_core.hpp"
#include "curvwork/stochastic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

using namespace curvwork;
using stochastic::Vec2;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Pinned tolerances.
constexpr double kNessTol = 1e-10;
constexpr double kNessSeconds = 2.0;
constexpr double kCurvatureRelTol = 1e-4;
constexpr double kCurvatureFloor = 1e-6;  // relative error denominator floor near g = 0
constexpr double kCurvatureSeconds = 10.0;
constexpr double kStokesTol = 1e-6;
constexpr double kSymmetryTol = 1e-10;
constexpr double kThermalTol = 1e-8;
constexpr double kFluxRelTol = 1e-6;
constexpr double kMonotoneSlack = 1e-12;  // round-off once the normalized flux saturates
constexpr double kSaturationLevel = 0.9;
constexpr double kSinusoidResidualFrac = 0.02;
constexpr double kEtaRelTol = 0.02;
constexpr double kZMax = 3.0;
constexpr double kFpRelTol = 0.02;
constexpr double kTiltRelTol = 0.02;
constexpr double kTriangleSeconds = 60.0;
constexpr double kDissipationRelTol = 0.10;
constexpr double kSelfcheckSeconds = 120.0;

struct Outcome {
  bool passed = false;
  std::string detail;
};

geometry::Coords at(double w, double g) {
  geometry::Coords c(2);
  c << w, g;
  return c;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome ness_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (auto [gd, gu] : {std::pair{1.0, 0.0}, std::pair{1.0, 0.3}}) {
    const auto model = geometry::fixed_basis_qubit(gd, gu);
    for (int i = 0; i <= 20; ++i) {
      for (int j = 0; j <= 20; ++j) {
        const double w = -2.0 + 0.2 * i, g = -2.0 + 0.2 * j;
        const auto num = quantum::bloch_from_density(model.stationary_state(at(w, g)));
        const auto ref = quantum::analytic_ness_bloch(w, g, gd, gu);
        worst = std::max({worst, std::abs(num.x - ref.x), std::abs(num.y - ref.y), std::abs(num.z - ref.z)});
      }
    }
  }
  const double s = seconds_since(t0);
  return {worst < kNessTol && s < kNessSeconds,
          "max |dr| = " + fmt(worst) + " (tol " + fmt(kNessTol) + "), " + fmt(s) + " s (limit " + fmt(kNessSeconds) + ")"};
}

Outcome coherent_curvature() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = geometry::fixed_basis_qubit(1.0, 0.0);
  double worst = 0.0;
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j <= 40; ++j) {
      const double w = -2.0 + 0.1 * i, g = -2.0 + 0.1 * j;
      const double fd = geometry::curvature_fd(model, at(w, g), 0, 1);
      const double cf = geometry::coherent_curvature_density(w, g, 1.0, 1.0);
      worst = std::max(worst, std::abs(fd - cf) / std::max(std::abs(cf), kCurvatureFloor));
    }
  }
  const double s = seconds_since(t0);
  return {worst < kCurvatureRelTol && s < kCurvatureSeconds,
          "max rel err = " + fmt(worst) + " (tol " + fmt(kCurvatureRelTol) + "), " + fmt(s) + " s"};
}

Outcome stokes_identity() {
  const auto model = geometry::fixed_basis_qubit(1.0, 0.0);
  const auto res = cycles::stokes_check(model, cycles::Protocol::circle(1.0, 1.0, 0.5),
                                        geometry::CurvatureField::coherent(1.0, 1.0));
  const double gap = std::abs(res.gap()) / std::max(1.0, std::abs(res.w_line));
  return {gap < kStokesTol, "W_line = " + fmt(res.w_line) + ", W_surface = " + fmt(res.w_surface) + ", gap = " +
                                fmt(gap) + " (tol " + fmt(kStokesTol) + ")"};
}

Outcome symmetry_cancellation() {
  const auto model = geometry::fixed_basis_qubit(1.0, 0.0);
  const auto field = geometry::CurvatureField::coherent(1.0, 1.0);
  double worst = 0.0;
  bool eta_zero = true;
  double worst_eta = 0.0;
  const auto poly = cycles::Protocol::piecewise_linear({at(0.2, -0.4), at(1.4, -0.7), at(1.4, 0.7), at(0.2, 0.4)}, true);
  for (const auto& p : {cycles::Protocol::circle(1.0, 0.0, 0.5), cycles::Protocol::offset_ellipse(-0.5, 0.0, 0.8, 0.3),
                        poly}) {
    const auto res = cycles::stokes_check(model, p, field);
    worst = std::max({worst, std::abs(res.w_line), std::abs(res.w_surface)});
    const auto eta = cycles::eta_geom(cycles::region_of(p), {1.0, 1.0, true, 1.0});
    worst = std::max(worst, std::abs(eta.w_coh));
    // Mirrored angular rules cancel bitwise on disks and ellipses; the
    // polygon rule cancels to round-off.
    if (std::holds_alternative<cycles::Polygon>(cycles::region_of(p))) {
      worst_eta = std::max(worst_eta, std::abs(eta.eta));
    } else {
      eta_zero = eta_zero && eta.eta == 0.0;
    }
  }
  return {worst < kSymmetryTol && eta_zero && worst_eta < kSymmetryTol,
          "max |W_coh| = " + fmt(worst) + " (tol " + fmt(kSymmetryTol) + "), eta exactly zero on disk and ellipse: " +
              (eta_zero ? "yes" : "no") + ", polygon |eta| = " + fmt(worst_eta)};
}

Outcome thermal_exactness() {
  const double beta = 1.0;
  const auto model = geometry::thermal_qubit(beta);
  const double loop = cycles::line_integral_work(model, cycles::Protocol::circle(1.0, 0.5, 0.4)).value;
  const auto open = cycles::Protocol::piecewise_linear({at(0.5, 0.2), at(1.5, 1.0)}, false);
  const double w = cycles::line_integral_work(model, open).value;
  const double df = geometry::free_energy(1.5, 1.0, beta) - geometry::free_energy(0.5, 0.2, beta);
  const double baseline =
      cycles::surface_integral_work(geometry::CurvatureField::thermal_baseline(beta), cycles::Disk{1.0, 0.5, 0.4}).value;
  const double fd = geometry::curvature_fd(model, at(1.0, 0.5), 0, 1);
  const double m = std::max(std::abs(loop), std::abs(w - df));
  return {m < kThermalTol, "|W_loop| = " + fmt(std::abs(loop)) + ", |W_open - dF| = " + fmt(std::abs(w - df)) +
                               " (tol " + fmt(kThermalTol) + "); Gibbs curvature at (1,0.5) = " + fmt(fd) +
                               ", baseline density flux through the loop = " + fmt(baseline)};
}

Outcome radius_sweep() {
  std::vector<double> radii;
  for (int k = 0; k <= 300; ++k) radii.push_back(0.01 * std::pow(10.0, 3.5 * k / 300.0));
  bool ok = true;
  std::ostringstream d;
  std::vector<double> eps90;
  for (double beta : {1.0, 2.0, 4.0}) {
    const auto s = cycles::radius_sweep(beta, radii);
    bool monotone = true;
    for (std::size_t k = 1; k < s.rows.size(); ++k) {
      monotone = monotone && s.rows[k].normalized >= s.rows[k - 1].normalized - kMonotoneSlack;
    }
    const double last = s.rows.back().normalized;
    const double flux_err = std::abs(beta * s.w_infinity - kTwoPi * std::log(2.0)) / (kTwoPi * std::log(2.0));
    double e90 = std::nan("");
    for (const auto& r : s.rows) {
      if (r.normalized >= kSaturationLevel) {
        e90 = r.epsilon;
        break;
      }
    }
    eps90.push_back(e90);
    ok = ok && monotone && std::abs(last - 1.0) < 1e-3 && flux_err < kFluxRelTol && std::isfinite(e90);
    d << "beta=" << beta << ": monotone " << (monotone ? "yes" : "no") << ", end " << fmt(last) << ", flux rel err "
      << fmt(flux_err) << ", eps90 " << fmt(e90) << "; ";
  }
  ok = ok && eps90[2] < eps90[0];
  d << "eps90(4) < eps90(1): " << (eps90[2] < eps90[0] ? "yes" : "no");
  return {ok, d.str()};
}

Outcome phase_sweep() {
  std::vector<double> phis;
  for (int k = 0; k < 16; ++k) phis.push_back(kTwoPi * k / 16);
  const unsigned threads = std::max(1u, default_thread_count());
  std::vector<double> amps;
  double residual_frac = 0.0;
  for (double dt : {0.05, 0.025, 0.0125}) {
    const auto s = cycles::phase_sweep({1.0, 0.5, 0.8, 0.4, 1.0, dt}, phis, {}, threads);
    amps.push_back(s.fit.amplitude);
    if (dt == 0.05) residual_frac = s.fit.max_residual / s.fit.amplitude;
  }
  const auto flat = cycles::phase_sweep({0.0, 0.0, 0.8, 0.8, 1.0, 0.05}, phis, {}, threads);
  const bool shrinking = amps[1] < amps[0] && amps[2] < amps[1] && amps[2] < 0.3 * amps[0];
  const bool flat_ok = flat.fit.amplitude < std::max(flat.fit.max_residual, 1e-12) * 10 && flat.fit.amplitude < 1e-9;
  return {residual_frac < kSinusoidResidualFrac && shrinking && flat_ok,
          "residual/amplitude = " + fmt(residual_frac) + " (tol " + fmt(kSinusoidResidualFrac) + "), amplitudes " +
              fmt(amps[0]) + ", " + fmt(amps[1]) + ", " + fmt(amps[2]) + " for dT = 0.05, 0.025, 0.0125; constant-eps loop amplitude " +
              fmt(flat.fit.amplitude)};
}

Outcome eta_formula() {
  bool ok = true;
  std::ostringstream d;
  for (double g0 : {0.5, 1.0, 1.5}) {
    const auto rep = cycles::eta_geom(cycles::Disk{0.5, g0, 0.05}, {1.0, 1.0, true, 1.0});
    const double ref = cycles::eta_small_cycle(0.5, g0, 1.0, 1.0);
    const double err = std::abs(rep.eta - ref) / std::abs(ref);
    ok = ok && err < kEtaRelTol;
    d << "g0=" << g0 << ": " << fmt(rep.eta) << " vs " << fmt(ref) << " (" << fmt(err) << "); ";
  }
  d << "tol " << fmt(kEtaRelTol);
  return {ok, d.str()};
}

Outcome stochastic_triangle() {
  const auto t0 = std::chrono::steady_clock::now();
  const double d = 0.5, t = 1.0;
  const Vec2 a(0.6, 0.8);
  const double var = 2.0 * d * a.squaredNorm() * t;
  const auto sde = stochastic::ControlSDE::isotropic_constant(d);
  const auto conn = stochastic::constant_connection(a);
  stochastic::EnsembleOptions eo;
  eo.samples = 100000;
  eo.base_seed = 20240917;
  eo.threads = std::max(1u, default_thread_count());
  const auto ens = stochastic::ensemble(sde, conn, Vec2::Zero(), {t, 0.05, std::nullopt, stochastic::BoundaryMode::Reflect}, eo);
  const double z = std::abs(ens.stats.variance - var) / ens.stats.se_variance;
  const auto grid = stochastic::default_grid(sde, conn, Vec2::Zero(), t);
  const auto fp = stochastic::fokker_planck_solve(sde, conn, Vec2::Zero(), grid, {t});
  const double fp_mean = std::abs(fp.trace.back().mean_w);
  const double fp_var = std::abs(fp.trace.back().var_w - var) / var;
  double tilt = 0.0;
  for (double chi : {0.5, 1.0}) {
    const auto zf = stochastic::tilted_evolve(sde, conn, chi, Vec2::Zero(), grid, {t});
    const double mgf = std::exp(chi * chi * d * a.squaredNorm() * t);
    tilt = std::max(tilt, std::abs(zf.trace.back().integral - mgf) / mgf);
  }
  const double s = seconds_since(t0);
  const bool ok = z < kZMax && fp_var < kFpRelTol && fp_mean < kFpRelTol * std::sqrt(var) && tilt < kTiltRelTol &&
                  fp.trace.back().leakage < 1e-6 && s < kTriangleSeconds;
  return {ok, "MC var " + fmt(ens.stats.variance) + " vs " + fmt(var) + " (z " + fmt(z) + "), FP var rel err " +
                  fmt(fp_var) + ", FP |mean| " + fmt(fp_mean) + ", leakage " + fmt(fp.trace.back().leakage) +
                  ", MGF rel err " + fmt(tilt) + ", " + fmt(s) + " s"};
}

Outcome jarzynski() {
  const double beta = 1.0;
  const auto conn = stochastic::thermal_connection(beta);
  const stochastic::ScalarField f = [beta](const Vec2& l) { return geometry::free_energy(l.x(), l.y(), beta); };
  stochastic::JarzynskiSpec open;
  open.paths = {[](double s) { return Vec2(1.0 + 0.5 * s, 0.5 + 0.5 * s); }, 0.3, 64};
  open.start = Vec2(1.0, 0.5);
  open.end = Vec2(1.5, 1.0);
  open.beta = beta;
  open.samples = 100000;
  open.base_seed = 31337;
  open.threads = std::max(1u, default_thread_count());
  const auto r1 = stochastic::jarzynski_check(conn, f, open);
  stochastic::JarzynskiSpec loop = open;
  loop.paths.base = [](double s) { return Vec2(1.0 + 0.5 * std::cos(kTwoPi * s), 1.0 + 0.5 * std::sin(kTwoPi * s)); };
  loop.start = loop.end = Vec2(1.5, 1.0);
  loop.base_seed = 4242;
  const auto r2 = stochastic::jarzynski_check(conn, f, loop);
  const bool ok = std::abs(r1.z) < kZMax && std::abs(r2.z) < kZMax && r2.target == 1.0;
  return {ok, "open: " + fmt(r1.estimate) + " vs " + fmt(r1.target) + " (z " + fmt(r1.z) + "); loop: " +
                  fmt(r2.estimate) + " vs " + fmt(r2.target) + " (z " + fmt(r2.z) + ")"};
}

Outcome quasistatic_limit() {
  const auto model = geometry::fixed_basis_qubit(1.0, 0.0);
  const auto p = cycles::Protocol::circle(1.0, 1.0, 0.5);
  std::vector<cycles::FiniteRateResult> res;
  for (double tau : {20.0, 40.0, 80.0, 160.0}) res.push_back(cycles::finite_rate_cycle_work(model, p, tau));
  bool converging = true;
  for (std::size_t k = 1; k < res.size(); ++k) {
    converging = converging && std::abs(res[k].excess_work) < std::abs(res[k - 1].excess_work);
  }
  std::ostringstream d;
  bool ok = converging;
  for (std::size_t k = 0; k < res.size(); ++k) {
    const double rel = std::abs(res[k].excess_work - res[k].predicted_dissipation) / std::abs(res[k].predicted_dissipation);
    if (k >= 2) ok = ok && rel < kDissipationRelTol;
    d << "tau=" << res[k].period << ": excess " << fmt(res[k].excess_work) << " vs " << fmt(res[k].predicted_dissipation)
      << " (" << fmt(rel) << "); ";
  }
  d << "W_geom " << fmt(res.back().geometric_work) << ", tol " << fmt(kDissipationRelTol) << " on the two slowest";
  return {ok, d.str()};
}

Outcome selfcheck() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto checks = cli::run_selfcheck(std::max(1u, default_thread_count()));
  const double s = seconds_since(t0);
  std::size_t passed = 0;
  std::string failed;
  for (const auto& c : checks) {
    if (c.passed) {
      ++passed;
    } else {
      failed += " " + c.name;
    }
  }
  return {passed == checks.size() && s < kSelfcheckSeconds,
          std::to_string(passed) + "/" + std::to_string(checks.size()) + " checks, " + fmt(s) + " s (limit " +
              fmt(kSelfcheckSeconds) + ")" + (failed.empty() ? "" : "; failed:" + failed)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"NESS null space vs closed form", ness_oracle},
      {"coherent curvature", coherent_curvature},
      {"Stokes identity", stokes_identity},
      {"symmetric loop cancellation", symmetry_cancellation},
      {"thermal exactness", thermal_exactness},
      {"radius sweep saturation", radius_sweep},
      {"phase sweep sinusoid", phase_sweep},
      {"small-cycle eta", eta_formula},
      {"MC / FP / tilted triangle", stochastic_triangle},
      {"Jarzynski", jarzynski},
      {"quasistatic limit", quasistatic_limit},
      {"selfcheck end to end", selfcheck},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failures;
    std::printf("%s criterion %2zu (%s): %s [%.2f s]\n", o.passed ? "PASS" : "FAIL", k + 1, criteria[k].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
