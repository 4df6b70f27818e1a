#include "curvwork/cli/selfcheck.hpp"

#include "curvwork/cli/commands.hpp"
#include "curvwork/cycles.hpp"
#include "curvwork/errors.hpp"
#include "curvwork/stochastic.hpp"

#include <chrono>
#include <cmath>
#include <functional>

namespace curvwork::cli {
namespace {

using stochastic::Vec2;

geometry::Coords at(double w, double g) {
  geometry::Coords c(2);
  c << w, g;
  return c;
}

CheckResult timed(const std::string& name, double threshold, const std::function<void(CheckResult&)>& body) {
  CheckResult r;
  r.name = name;
  r.threshold = threshold;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

std::vector<CheckResult> run_selfcheck(unsigned threads) {
  std::vector<CheckResult> out;

  out.push_back(timed("ness-null-space-vs-closed-form", 1e-10, [](CheckResult& r) {
    double worst = 0.0;
    for (auto [gd, gu] : {std::pair{1.0, 0.0}, std::pair{1.0, 0.3}}) {
      const auto model = geometry::fixed_basis_qubit(gd, gu);
      for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) {
          const double w = -2.0 + 0.2 * i;
          const double g = -2.0 + 0.2 * j;
          const auto num = quantum::bloch_from_density(model.stationary_state(at(w, g)));
          const auto ref = quantum::analytic_ness_bloch(w, g, gd, gu);
          worst = std::max({worst, std::abs(num.x - ref.x), std::abs(num.y - ref.y), std::abs(num.z - ref.z)});
        }
      }
    }
    r.measured = worst;
    r.passed = worst < r.threshold;
  }));

  out.push_back(timed("coherent-curvature-fd-vs-closed-form", 1e-4, [](CheckResult& r) {
    const auto model = geometry::fixed_basis_qubit(1.0, 0.0);
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i) {
      for (int j = 0; j <= 40; ++j) {
        const double w = -2.0 + 0.1 * i;
        const double g = -2.0 + 0.1 * j;
        const double fd = geometry::curvature_fd(model, at(w, g), 0, 1);
        const double cf = geometry::coherent_curvature_density(w, g, 1.0, 1.0);
        worst = std::max(worst, std::abs(fd - cf) / std::max(std::abs(cf), 1e-6));
      }
    }
    r.measured = worst;
    r.passed = worst < r.threshold;
  }));

  out.push_back(timed("stokes-offset-coherent-loop", 1e-6, [](CheckResult& r) {
    const auto model = geometry::fixed_basis_qubit(1.0, 0.0, geometry::StationaryMode::AnalyticFixedBasis);
    const auto res = cycles::stokes_check(model, cycles::Protocol::circle(1.0, 1.0, 0.5),
                                          geometry::CurvatureField::coherent(1.0, 1.0));
    r.measured = std::abs(res.gap()) / std::max(1.0, std::abs(res.w_line));
    r.detail = "W = " + format_number(res.w_line);
    r.passed = r.measured < r.threshold;
  }));

  out.push_back(timed("symmetric-loop-cancellation", 1e-10, [](CheckResult& r) {
    const auto model = geometry::fixed_basis_qubit(1.0, 0.0, geometry::StationaryMode::AnalyticFixedBasis);
    const auto res = cycles::stokes_check(model, cycles::Protocol::circle(1.0, 0.0, 0.5),
                                          geometry::CurvatureField::coherent(1.0, 1.0));
    const auto eta = cycles::eta_geom(cycles::Disk{1.0, 0.0, 0.5}, {1.0, 1.0, true, 1.0});
    r.measured = std::max({std::abs(res.w_line), std::abs(res.w_surface), std::abs(eta.eta)});
    r.passed = r.measured < r.threshold && eta.eta == 0.0;
  }));

  out.push_back(timed("thermal-exact-form", 1e-8, [](CheckResult& r) {
    const double beta = 1.0;
    const auto model = geometry::thermal_qubit(beta);
    const double loop = cycles::line_integral_work(model, cycles::Protocol::circle(1.0, 0.5, 0.4)).value;
    const auto open = cycles::Protocol::piecewise_linear({at(0.5, 0.2), at(1.5, 1.0)}, false);
    const double w = cycles::line_integral_work(model, open).value;
    const double df = geometry::free_energy(1.5, 1.0, beta) - geometry::free_energy(0.5, 0.2, beta);
    const double baseline = cycles::surface_integral_work(geometry::CurvatureField::thermal_baseline(beta),
                                                          cycles::Disk{1.0, 0.5, 0.4})
                                .value;
    r.measured = std::max(std::abs(loop), std::abs(w - df));
    r.detail = "baseline flux through the same loop = " + format_number(baseline);
    r.passed = r.measured < r.threshold;
  }));

  out.push_back(timed("exact-form-path-independence", 1e-2, [](CheckResult& r) {
    const double beta = 1.0;
    const auto sde = stochastic::ControlSDE::isotropic_constant(0.05, Vec2(0.3, 0.2));
    stochastic::TrajectoryOptions opt;
    opt.t_final = 1.0;
    opt.dt = 1e-3;
    const Vec2 start(1.0, 0.5);
    const auto conn = stochastic::thermal_connection(beta);
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 32; ++i) {
      const auto tr = stochastic::simulate_trajectory(sde, conn, start, opt, stochastic::derive_seed(11, i));
      const Vec2 end = tr.lambda.back();
      const double df = geometry::free_energy(end.x(), end.y(), beta) - geometry::free_energy(start.x(), start.y(), beta);
      worst = std::max(worst, std::abs(tr.work.back() - df));
    }
    r.threshold = 10.0 * opt.dt;
    r.measured = worst;
    r.passed = worst < r.threshold;
  }));

  out.push_back(timed("mc-fp-tilted-triangle", 3.0, [threads](CheckResult& r) {
    const double d = 0.5;
    const Vec2 a(0.6, 0.8);
    const double t = 1.0;
    const double exact_var = 2.0 * d * a.squaredNorm() * t;
    const auto sde = stochastic::ControlSDE::isotropic_constant(d);
    const auto conn = stochastic::constant_connection(a);
    stochastic::TrajectoryOptions opt;
    opt.t_final = t;
    opt.dt = 0.05;
    stochastic::EnsembleOptions eo;
    eo.samples = 20000;
    eo.base_seed = 2024;
    eo.threads = threads;
    const auto ens = stochastic::ensemble(sde, conn, Vec2::Zero(), opt, eo);
    const double z = std::abs(ens.stats.variance - exact_var) / ens.stats.se_variance;
    const auto grid = stochastic::default_grid(sde, conn, Vec2::Zero(), t);
    const auto rho = stochastic::fokker_planck_solve(sde, conn, Vec2::Zero(), grid, {t});
    const double fp_err = std::abs(rho.trace.back().var_w - exact_var) / exact_var;
    const double chi = 1.0;
    const auto zf = stochastic::tilted_evolve(sde, conn, chi, Vec2::Zero(), grid, {t});
    const double mgf = std::exp(chi * chi * d * a.squaredNorm() * t);
    const double tilt_err = std::abs(zf.trace.back().integral - mgf) / mgf;
    r.measured = z;
    r.detail = "FP var rel err " + format_number(fp_err) + ", tilted rel err " + format_number(tilt_err);
    r.passed = z < 3.0 && fp_err < 0.02 && tilt_err < 0.02;
  }));

  out.push_back(timed("determinism", 0.0, [](CheckResult& r) {
    const auto sde = stochastic::ControlSDE::isotropic_constant(0.2, Vec2(0.1, 0.0));
    const auto conn = stochastic::coherent_connection(1.0, 0.2);
    stochastic::TrajectoryOptions opt;
    opt.t_final = 0.5;
    opt.dt = 0.01;
    stochastic::EnsembleOptions eo;
    eo.samples = 64;
    eo.base_seed = 99;
    eo.threads = 1;
    const auto serial = stochastic::ensemble(sde, conn, Vec2(1.0, 0.5), opt, eo);
    eo.threads = 4;
    const auto parallel = stochastic::ensemble(sde, conn, Vec2(1.0, 0.5), opt, eo);
    double diff = 0.0;
    for (std::size_t i = 0; i < serial.final_work.size(); ++i) {
      diff = std::max(diff, std::abs(serial.final_work[i] - parallel.final_work[i]));
    }
    const auto single = stochastic::simulate_trajectory(sde, conn, Vec2(1.0, 0.5), opt, stochastic::derive_seed(99, 0));
    diff = std::max(diff, std::abs(single.work.back() - serial.final_work[0]));

    Json doc = {{"command", "curvature-map"},
                {"model", {{"mode", "coherent"}, {"gamma", 1.0}, {"p", 1.0}}},
                {"grid", {{"omega", {-1.0, 1.0, 5}}, {"g", {-1.0, 1.0, 5}}}}};
    const auto cfg = make_run_config(doc, {});
    const auto a = cmd_curvature_map(cfg).outputs.at(0).table.to_csv();
    const auto b = cmd_curvature_map(cfg).outputs.at(0).table.to_csv();
    r.measured = diff + (a == b ? 0.0 : 1.0);
    r.passed = r.measured == 0.0;
  }));

  return out;
}

}  // namespace curvwork::cli
