#include "curvwork/cli/commands.hpp"

#include "curvwork/cli/selfcheck.hpp"
#include "curvwork/errors.hpp"
#include "curvwork/parallel.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#ifndef CURVWORK_VERSION
#define CURVWORK_VERSION "dev"
#endif

namespace curvwork::cli {
namespace {

using stochastic::Vec2;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Reader root(const RunConfig& c) { return Reader(c.document, ""); }

Reader numeric(const RunConfig& c) {
  static const Json empty = Json::object();
  return c.document.contains("numeric") ? Reader(c.document["numeric"], "/numeric") : Reader(empty, "/numeric");
}

cycles::LineOptions line_options(const RunConfig& c) {
  const Reader n = numeric(c);
  cycles::LineOptions o;
  o.nodes = n.count("nodes", o.nodes, 16);
  if (c.tolerance > 0.0) o.tolerance = c.tolerance;
  return o;
}

cycles::SurfaceOptions surface_options(const RunConfig& c) {
  const Reader n = numeric(c);
  cycles::SurfaceOptions o;
  o.radial = n.count("radial", o.radial, 2);
  o.angular = n.count("angular", o.angular, 4);
  if (c.tolerance > 0.0) o.tolerance = c.tolerance;
  return o;
}

std::string str(double v) { return format_number(v); }

// Connection block: {"type": "model"} uses /model, {"type": "constant", "value": [a, b]}.
struct ConnectionChoice {
  stochastic::Connection connection;
  std::optional<Vec2> constant;
  std::string label;
};

ConnectionChoice parse_connection(const RunConfig& c) {
  const Reader r = root(c);
  ConnectionChoice out;
  std::string type = "model";
  if (r.has("connection")) {
    const Reader conn = r.child("connection");
    conn.allow_only({"type", "value"});
    type = conn.string("type", "model");
    if (type == "constant") {
      out.constant = conn.pair("value");
      out.connection = stochastic::constant_connection(*out.constant);
      out.label = "constant";
      return out;
    }
    if (type != "model") conn.fail("type", "must be model or constant");
  }
  const ModelSpec model = parse_model(r.child("model"));
  out.connection = model.connection();
  out.label = model_mode_name(model.mode);
  return out;
}

struct SdeChoice {
  stochastic::ControlSDE sde;
  Vec2 start = Vec2::Zero();
  stochastic::TrajectoryOptions trajectory;
  Vec2 velocity = Vec2::Zero();
};

SdeChoice parse_sde(const RunConfig& c) {
  const Reader s = root(c).child("sde");
  s.allow_only({"diffusion", "velocity", "start", "t_final", "dt", "domain"});
  SdeChoice out;
  out.velocity = s.pair("velocity", Vec2::Zero());
  out.sde = stochastic::ControlSDE::isotropic_constant(s.non_negative("diffusion", 0.0), out.velocity);
  out.start = s.pair("start", Vec2::Zero());
  out.trajectory.t_final = s.positive("t_final", 1.0);
  out.trajectory.dt = s.positive("dt", 1e-2);
  if (out.trajectory.dt > out.trajectory.t_final) s.fail("dt", "must not exceed t_final");
  if (s.has("domain")) {
    const Reader d = s.child("domain");
    d.allow_only({"lower", "upper", "boundary"});
    stochastic::Box box;
    box.lower = d.pair("lower");
    box.upper = d.pair("upper");
    if (!(box.upper.array() > box.lower.array()).all()) d.fail("upper", "must exceed lower componentwise");
    if (!box.contains(out.start)) s.fail("start", "lies outside the domain");
    out.trajectory.domain = box;
    const std::string mode = d.string("boundary", "reflect");
    if (mode == "reflect") {
      out.trajectory.boundary = stochastic::BoundaryMode::Reflect;
    } else if (mode == "reject") {
      out.trajectory.boundary = stochastic::BoundaryMode::Reject;
    } else {
      d.fail("boundary", "must be reflect or reject");
    }
  }
  return out;
}

}  // namespace

CommandResult cmd_curvature_map(const RunConfig& config) {
  const Reader r = root(config);
  const ModelSpec model = parse_model(r.child("model"));
  const Reader grid = r.child("grid");
  grid.allow_only({"omega", "g", "include_baseline"});
  const auto omegas = grid.range("omega");
  const auto gs = grid.range("g");
  const bool baseline = grid.boolean("include_baseline", model.mode == ModelMode::Thermal) && model.has_beta;
  if (grid.boolean("include_baseline", false) && !model.has_beta) {
    grid.fail("include_baseline", "the baseline field needs beta or temperature in /model");
  }
  const bool with_a = !(model.mode == ModelMode::Coherent && model.detailed_balance);

  const auto field = model.curvature_field();
  const auto base = geometry::CurvatureField::thermal_baseline(model.beta);
  std::optional<stochastic::Connection> conn;
  if (with_a) conn = model.connection();

  std::vector<Column> cols = {{"omega", "energy"}, {"g", "energy"}};
  if (with_a) {
    cols.push_back({"A_omega", ""});
    cols.push_back({"A_g", ""});
  }
  cols.push_back({"curvature", "1/energy"});
  if (baseline) cols.push_back({"baseline", "1/energy"});
  ResultTable t(cols);
  t.set_meta("model", model_mode_name(model.mode));
  t.set_meta("curvature_field", field.label());
  if (baseline) t.set_meta("baseline_field", base.label());

  std::vector<double> om(omegas.size());
  std::vector<double> gg(omegas.size());
  std::vector<double> cv(omegas.size());
  std::vector<double> bv(omegas.size());
  for (double g : gs) {
    for (std::size_t i = 0; i < omegas.size(); ++i) {
      om[i] = omegas[i];
      gg[i] = g;
    }
    field.evaluate(om, gg, cv);
    if (baseline) base.evaluate(om, gg, bv);
    for (std::size_t i = 0; i < omegas.size(); ++i) {
      std::vector<double> row = {om[i], g};
      if (with_a) {
        const Vec2 a = (*conn)(Vec2(om[i], g));
        row.push_back(a.x());
        row.push_back(a.y());
      }
      row.push_back(cv[i]);
      if (baseline) row.push_back(bv[i]);
      t.add_row(std::move(row));
    }
  }
  CommandResult out;
  out.summary.push_back("curvature map: " + std::to_string(t.rows().size()) + " nodes, field " + field.label());
  out.outputs.push_back({"curvature_map", std::move(t), PlotSpec{"curvature", "omega", {"g", "curvature"}, true}});
  return out;
}

CommandResult cmd_cycle_work(const RunConfig& config) {
  const Reader r = root(config);
  const ModelSpec model = parse_model(r.child("model"));
  const cycles::Protocol protocol = parse_protocol(r.child("protocol"));
  const auto line = line_options(config);
  const auto surface = surface_options(config);
  const std::size_t first_law_steps = numeric(config).count("first_law_steps", 256, 2);

  CommandResult out;
  std::vector<Column> cols;
  std::vector<double> row;
  ResultTable summary;

  const bool temperature = protocol.family() == cycles::ProtocolFamily::TemperatureModulated;
  const bool line_available = !(model.mode == ModelMode::Coherent && model.detailed_balance);
  geometry::ControlModel control;
  if (temperature) {
    if (model.mode != ModelMode::Thermal) {
      throw ValidationError("config /protocol/type: temperature protocols need the thermal model");
    }
    control = geometry::thermal_qubit_with_temperature();
  } else if (line_available) {
    control = model.control_model();
  }

  const bool eta = model.mode != ModelMode::Thermal && model.has_beta && !temperature;
  if (temperature) {
    const auto lw = cycles::line_integral_work(control, protocol, line);
    cols = {{"w_line", "energy"}, {"line_residual", "energy"}, {"nodes", ""}};
    row = {lw.value, lw.residual_estimate, static_cast<double>(lw.nodes)};
  } else if (line_available) {
    const auto field = model.curvature_field();
    const auto res = cycles::stokes_check(control, protocol, field, line, surface);
    cols = {{"w_line", "energy"},        {"w_surface", "energy"}, {"gap", "energy"},
            {"line_residual", "energy"}, {"surface_error", "energy"}, {"nodes", ""}};
    row = {res.w_line, res.w_surface, res.gap(), res.line_residual, res.surface_error, static_cast<double>(res.nodes)};
  }
  if (eta || !line_available) {
    if (!model.has_beta) throw ValidationError("config /model/beta: needed for the population baseline");
    const auto region = protocol.reversed_direction() ? cycles::region_of(protocol.reversed()) : cycles::region_of(protocol);
    cycles::EtaSpec spec{model.gamma, model.beta, model.detailed_balance, model.bias()};
    const auto rep = cycles::eta_geom(region, spec, surface);
    const double sign = protocol.reversed_direction() ? -1.0 : 1.0;
    cols.push_back({"w_coh", "energy"});
    cols.push_back({"w_pop", "energy"});
    cols.push_back({"eta", ""});
    row.push_back(sign * rep.w_coh);
    row.push_back(sign * rep.w_pop);
    row.push_back(rep.eta);
  }
  summary = ResultTable(cols);
  summary.add_row(row);
  summary.set_meta("model", model_mode_name(model.mode));
  summary.set_meta("protocol", cycles::protocol_family_name(protocol.family()));
  summary.set_meta("reversed", protocol.reversed_direction() ? "true" : "false");
  if (line_available && !temperature) summary.set_meta("surface_field", model.curvature_field().label());
  if (model.mode == ModelMode::Thermal && !temperature) {
    summary.set_meta("note", "w_line uses the Gibbs state (exact one-form); w_surface integrates the baseline density");
  }
  for (std::size_t k = 0; k < cols.size(); ++k) out.summary.push_back(cols[k].name + " = " + str(row[k]));
  out.outputs.push_back({"cycle_work", std::move(summary), std::nullopt});

  if (line_available || temperature) {
    const auto fl = cycles::first_law_trace(control, protocol, first_law_steps);
    ResultTable t({{"step", ""}, {"theta", ""}, {"du", "energy"}, {"dw", "energy"}, {"dq", "energy"}});
    for (std::size_t k = 0; k < fl.du.size(); ++k) {
      t.add_row({static_cast<double>(k), kTwoPi * (static_cast<double>(k) + 0.5) / static_cast<double>(first_law_steps),
                 fl.du[k], fl.dw[k], fl.dq[k]});
    }
    t.set_meta("sum_du", str(fl.sum_du));
    t.set_meta("sum_dw", str(fl.sum_dw));
    t.set_meta("sum_dq", str(fl.sum_dq));
    t.set_meta("max_step_residual", str(fl.max_step_residual));
    out.outputs.push_back({"cycle_work_first_law", std::move(t), PlotSpec{"first law", "theta", {"dw", "dq"}, false}});
  }
  return out;
}

CommandResult cmd_radius_sweep(const RunConfig& config) {
  const Reader s = root(config).child("sweep");
  s.allow_only({"betas", "radii"});
  const auto betas = s.numbers("betas");
  if (betas.empty()) s.fail("betas", "need at least one value");
  for (std::size_t k = 0; k < betas.size(); ++k) {
    if (!(betas[k] > 0.0)) s.fail("betas/" + std::to_string(k), "must be positive");
  }
  const auto radii = s.range("radii");
  if (!(radii.front() > 0.0)) s.fail("radii", "radii must be positive");
  const auto options = surface_options(config);

  ResultTable t({{"beta", "1/energy"}, {"epsilon", "energy"}, {"work", "energy"}, {"normalized", ""},
                 {"w_infinity", "energy"}});
  t.set_meta("field", geometry::curvature_mode_name(geometry::CurvatureMode::ThermalBaseline));
  CommandResult out;
  std::vector<cycles::RadiusSweep> sweeps(betas.size());
  parallel_for(betas.size(), config.threads,
               [&](std::size_t k) { sweeps[k] = cycles::radius_sweep(betas[k], radii, options); });
  for (const auto& sw : sweeps) {
    for (const auto& row : sw.rows) t.add_row({sw.beta, row.epsilon, row.work, row.normalized, sw.w_infinity});
    out.summary.push_back("beta = " + str(sw.beta) + ": W_inf = " + str(sw.w_infinity) +
                          ", beta W_inf / (2 pi ln 2) = " + str(sw.beta * sw.w_infinity / (kTwoPi * std::log(2.0))));
  }
  out.outputs.push_back({"radius_sweep", std::move(t), PlotSpec{"normalized cycle work", "epsilon", {"normalized"}, false}});
  return out;
}

CommandResult cmd_phase_sweep(const RunConfig& config) {
  const Reader s = root(config).child("sweep");
  s.allow_only({"center", "a", "b", "t0", "delta_t", "phases"});
  cycles::PhaseLoop loop;
  const Vec2 c = s.pair("center");
  loop.omega0 = c.x();
  loop.g0 = c.y();
  loop.a = s.non_negative("a", 1.0);
  loop.b = s.non_negative("b", 1.0);
  loop.t0 = s.positive("t0", 1.0);
  loop.delta_t = s.non_negative("delta_t", 0.0);
  if (!(loop.t0 > loop.delta_t)) s.fail("delta_t", "must be smaller than t0");
  const std::size_t n = s.count("phases", 24, 3);
  std::vector<double> phis(n);
  for (std::size_t k = 0; k < n; ++k) phis[k] = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
  auto line = line_options(config);
  line.check_convergence = config.tolerance > 0.0;
  const auto sweep = cycles::phase_sweep(loop, phis, line, config.threads);

  ResultTable t({{"phi", "rad"}, {"work", "energy"}, {"fit", "energy"}});
  for (std::size_t k = 0; k < n; ++k) {
    t.add_row({sweep.phi[k], sweep.work[k],
               sweep.fit.offset + sweep.fit.amplitude * std::cos(sweep.phi[k] + sweep.fit.phase)});
  }
  t.set_meta("fit_offset", str(sweep.fit.offset));
  t.set_meta("fit_amplitude", str(sweep.fit.amplitude));
  t.set_meta("fit_phase", str(sweep.fit.phase));
  t.set_meta("fit_max_residual", str(sweep.fit.max_residual));
  CommandResult out;
  out.summary.push_back("amplitude = " + str(sweep.fit.amplitude) + ", max residual = " + str(sweep.fit.max_residual));
  out.outputs.push_back({"phase_sweep", std::move(t), PlotSpec{"cycle work vs phase", "phi", {"work", "fit"}, false}});
  return out;
}

CommandResult cmd_eta_map(const RunConfig& config) {
  const Reader r = root(config);
  const ModelSpec model = parse_model(r.child("model"));
  if (model.mode != ModelMode::Coherent || !model.has_beta) {
    throw ValidationError("config /model: eta-map needs the coherent mode with beta or temperature");
  }
  const Reader s = r.child("sweep");
  s.allow_only({"omega0", "g0", "radius"});
  const auto omegas = s.range("omega0");
  const auto gs = s.range("g0");
  const double radius = s.positive("radius", 0.05);
  const auto options = surface_options(config);
  const cycles::EtaSpec spec{model.gamma, model.beta, model.detailed_balance, model.bias()};

  const std::size_t n = omegas.size() * gs.size();
  std::vector<cycles::EtaReport> reports(n);
  std::vector<char> failed(n, 0);
  parallel_for(n, config.threads, [&](std::size_t k) {
    const double w0 = omegas[k % omegas.size()];
    const double g0 = gs[k / omegas.size()];
    try {
      reports[k] = cycles::eta_geom(cycles::Disk{w0, g0, radius}, spec, options);
    } catch (const ZeroBaseline&) {
      failed[k] = 1;
    }
  });
  std::vector<Column> cols = {{"omega0", "energy"}, {"g0", "energy"}, {"w_coh", "energy"}, {"w_pop", "energy"},
                              {"eta", ""},          {"local", ""}};
  if (model.detailed_balance) cols.push_back({"eta_small_cycle", ""});
  ResultTable t(cols);
  const double nan = std::nan("");
  for (std::size_t k = 0; k < n; ++k) {
    const double w0 = omegas[k % omegas.size()];
    const double g0 = gs[k / omegas.size()];
    const auto& e = reports[k];
    std::vector<double> row = {w0, g0, e.w_coh, e.w_pop, failed[k] ? nan : e.eta, failed[k] ? nan : e.local};
    if (model.detailed_balance) row.push_back(cycles::eta_small_cycle(w0, g0, model.gamma, model.beta));
    t.add_row(std::move(row));
  }
  t.set_meta("radius", str(radius));
  t.set_meta("coherent_field", model.curvature_field().label());
  t.set_meta("baseline_field", geometry::CurvatureField::thermal_baseline(model.beta).label());
  CommandResult out;
  out.summary.push_back("eta map: " + std::to_string(n) + " centres");
  out.outputs.push_back({"eta_map", std::move(t), PlotSpec{"eta", "omega0", {"g0", "eta"}, true}});
  return out;
}

CommandResult cmd_sde_ensemble(const RunConfig& config) {
  const Reader r = root(config);
  const SdeChoice sde = parse_sde(config);
  const ConnectionChoice conn = parse_connection(config);
  stochastic::EnsembleOptions opts;
  if (r.has("ensemble")) {
    const Reader e = r.child("ensemble");
    e.allow_only({"samples", "histogram_bins"});
    opts.samples = e.count("samples", opts.samples, 1);
    opts.histogram_bins = e.count("histogram_bins", opts.histogram_bins, 1);
  }
  opts.base_seed = *config.seed;
  opts.threads = config.threads;
  const auto ens = stochastic::ensemble(sde.sde, conn.connection, sde.start, sde.trajectory, opts);

  std::vector<Column> cols = {{"samples", ""},  {"rejected", ""},    {"mean", "energy"},
                              {"variance", "energy^2"}, {"skewness", ""}, {"se_mean", "energy"},
                              {"se_variance", "energy^2"}};
  std::vector<double> row = {static_cast<double>(ens.stats.n), static_cast<double>(ens.rejected), ens.stats.mean,
                             ens.stats.variance, ens.stats.skewness, ens.stats.se_mean, ens.stats.se_variance};
  const bool closed_form = conn.constant && sde.velocity.squaredNorm() == 0.0 && !sde.trajectory.domain;
  if (closed_form) {
    cols.push_back({"predicted_variance", "energy^2"});
    row.push_back(2.0 * sde.sde.diffusion * conn.constant->squaredNorm() * sde.trajectory.t_final);
  }
  ResultTable t(cols);
  t.add_row(row);
  t.set_meta("connection", conn.label);
  ResultTable h({{"lower", "energy"}, {"upper", "energy"}, {"count", ""}});
  for (std::size_t b = 0; b < ens.histogram.counts.size(); ++b) {
    h.add_row({ens.histogram.edges[b], ens.histogram.edges[b + 1], static_cast<double>(ens.histogram.counts[b])});
  }
  CommandResult out;
  out.summary.push_back("mean W = " + str(ens.stats.mean) + " +- " + str(ens.stats.se_mean) +
                        ", var W = " + str(ens.stats.variance) + " +- " + str(ens.stats.se_variance));
  out.outputs.push_back({"sde_ensemble", std::move(t), std::nullopt});
  out.outputs.push_back({"sde_ensemble_histogram", std::move(h), PlotSpec{"work histogram", "lower", {"count"}, false}});
  return out;
}

CommandResult cmd_fp_solve(const RunConfig& config) {
  const Reader r = root(config);
  const SdeChoice sde = parse_sde(config);
  const ConnectionChoice conn = parse_connection(config);
  stochastic::FPOptions opts;
  opts.t_final = sde.trajectory.t_final;
  std::size_t cells = 61;
  std::vector<double> chis;
  if (r.has("fp")) {
    const Reader f = r.child("fp");
    f.allow_only({"cells", "dt", "record_every", "chi"});
    cells = f.count("cells", cells, 5);
    opts.dt = f.non_negative("dt", 0.0);
    opts.record_every = f.count("record_every", opts.record_every, 1);
    if (f.has("chi")) chis = f.numbers("chi");
  }
  if (!(sde.sde.diffusion > 0.0)) throw ValidationError("config /sde/diffusion: the density solver needs D > 0");
  const auto grid = stochastic::default_grid(sde.sde, conn.connection, sde.start, opts.t_final, cells);
  const auto rho = stochastic::fokker_planck_solve(sde.sde, conn.connection, sde.start, grid, opts);

  ResultTable t({{"time", "time"}, {"mass", ""}, {"leakage", ""}, {"mean_w", "energy"}, {"var_w", "energy^2"},
                 {"mean_bw", "energy/time"}, {"mean_lambda1", ""}, {"mean_lambda2", ""}});
  for (const auto& rec : rho.trace) {
    t.add_row({rec.time, rec.mass, rec.leakage, rec.mean_w, rec.var_w, rec.mean_bw, rec.mean_lambda.x(),
               rec.mean_lambda.y()});
  }
  t.set_meta("connection", conn.label);
  t.set_meta("dt", str(rho.dt));
  t.set_meta("steps", std::to_string(rho.steps));
  t.set_meta("grid", std::to_string(grid.cells_x) + "x" + std::to_string(grid.cells_y) + "x" +
                         std::to_string(grid.w_nodes()));
  t.set_meta("min_value", str(rho.min_value));
  ResultTable m({{"w", "energy"}, {"probability", ""}});
  const auto marginal = rho.w_marginal();
  for (std::size_t k = 0; k < marginal.size(); ++k) m.add_row({rho.w_node(k), marginal[k]});

  CommandResult out;
  const auto& last = rho.trace.back();
  out.summary.push_back("t = " + str(last.time) + ": mean W = " + str(last.mean_w) + ", var W = " + str(last.var_w) +
                        ", leakage = " + str(last.leakage));
  out.outputs.push_back({"fp_solve", std::move(t), PlotSpec{"work moments", "time", {"mean_w", "var_w"}, false}});
  out.outputs.push_back({"fp_solve_w_marginal", std::move(m), PlotSpec{"work marginal", "w", {"probability"}, false}});
  if (!chis.empty()) {
    std::vector<Column> cols = {{"chi", "1/energy"}, {"integral", ""}};
    const bool closed_form = conn.constant && sde.velocity.squaredNorm() == 0.0;
    if (closed_form) cols.push_back({"closed_form", ""});
    ResultTable z(cols);
    for (double chi : chis) {
      const auto field = stochastic::tilted_evolve(sde.sde, conn.connection, chi, sde.start, grid, opts);
      std::vector<double> row = {chi, field.trace.back().integral};
      if (closed_form) {
        row.push_back(std::exp(chi * chi * sde.sde.diffusion * conn.constant->squaredNorm() * opts.t_final));
      }
      z.add_row(std::move(row));
    }
    out.outputs.push_back({"fp_solve_tilted", std::move(z), PlotSpec{"tilted integral", "chi", {"integral"}, false}});
  }
  return out;
}

CommandResult cmd_jarzynski(const RunConfig& config) {
  const Reader r = root(config);
  const ModelSpec model = parse_model(r.child("model"));
  if (model.mode != ModelMode::Thermal) {
    throw ValidationError("config /model/mode: jarzynski needs the thermal mode (free energy defined)");
  }
  const Reader p = r.child("path");
  p.allow_only({"start", "end", "loop_radius", "noise", "steps", "samples", "beta"});
  stochastic::JarzynskiSpec spec;
  spec.start = p.pair("start");
  spec.beta = p.non_negative("beta", model.beta);
  spec.samples = p.count("samples", 10000, 2);
  spec.paths.noise = p.non_negative("noise", 0.1);
  spec.paths.steps = p.count("steps", 64, 4);
  if (spec.paths.steps % 2 != 0) p.fail("steps", "must be even");
  spec.base_seed = *config.seed;
  spec.threads = config.threads;
  const Vec2 a = spec.start;
  std::string shape;
  if (p.has("end")) {
    if (p.has("loop_radius")) p.fail("loop_radius", "give end or loop_radius, not both");
    spec.end = p.pair("end");
    const Vec2 b = spec.end;
    spec.paths.base = [a, b](double s) -> Vec2 { return a + s * (b - a); };
    shape = "open";
  } else {
    const double rad = p.positive("loop_radius", 0.5);
    spec.end = a;
    // Circle through the start point; exact closure at s = 1.
    spec.paths.base = [a, rad](double s) -> Vec2 {
      if (s == 1.0) return a;
      return a + rad * Vec2(std::cos(kTwoPi * s) - 1.0, std::sin(kTwoPi * s));
    };
    shape = "loop";
  }
  const double beta_model = model.beta;
  const auto rep = stochastic::jarzynski_check(
      model.connection(), [beta_model](const Vec2& l) { return geometry::free_energy(l.x(), l.y(), beta_model); }, spec);
  ResultTable t({{"beta", "1/energy"}, {"delta_f", "energy"}, {"target", ""}, {"estimate", ""},
                 {"standard_error", ""}, {"discretization", ""}, {"z", ""}, {"mean_work", "energy"}, {"samples", ""}});
  t.add_row({spec.beta, rep.delta_f, rep.target, rep.estimate, rep.standard_error, rep.discretization, rep.z,
             rep.mean_work, static_cast<double>(rep.samples)});
  t.set_meta("path", shape);
  CommandResult out;
  out.summary.push_back("<exp(-beta W)> = " + str(rep.estimate) + ", target = " + str(rep.target) +
                        ", z = " + str(rep.z));
  out.outputs.push_back({"jarzynski", std::move(t), std::nullopt});
  return out;
}

CommandResult cmd_selfcheck(const RunConfig& config) {
  const auto checks = run_selfcheck(config.threads);
  ResultTable t({{"check", ""}, {"passed", ""}, {"measured", ""}, {"threshold", ""}});
  CommandResult out;
  for (std::size_t k = 0; k < checks.size(); ++k) {
    const auto& c = checks[k];
    t.add_row({static_cast<double>(k), c.passed ? 1.0 : 0.0, c.measured, c.threshold});
    t.set_meta("check_" + std::to_string(k), c.name);
    char line[256];
    std::snprintf(line, sizeof line, "%s %-34s measured %.3e  threshold %.3e  (%.2f s)", c.passed ? "PASS" : "FAIL",
                  c.name.c_str(), c.measured, c.threshold, c.seconds);
    out.summary.push_back(line + (c.detail.empty() ? std::string() : "  " + c.detail));
    if (!c.passed) out.failed = true;
  }
  out.outputs.push_back({"selfcheck", std::move(t), std::nullopt});
  return out;
}

CommandResult run_command(const RunConfig& config) {
  const std::string& c = config.command;
  if (c == "curvature-map") return cmd_curvature_map(config);
  if (c == "cycle-work") return cmd_cycle_work(config);
  if (c == "radius-sweep") return cmd_radius_sweep(config);
  if (c == "phase-sweep") return cmd_phase_sweep(config);
  if (c == "eta-map") return cmd_eta_map(config);
  if (c == "sde-ensemble") return cmd_sde_ensemble(config);
  if (c == "fp-solve") return cmd_fp_solve(config);
  if (c == "jarzynski") return cmd_jarzynski(config);
  if (c == "selfcheck") return cmd_selfcheck(config);
  throw ValidationError("unknown command '" + c + "'");
}

std::vector<std::string> write_outputs(CommandResult& result, const RunConfig& config) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + config.out_dir + "': " + ec.message());
  std::vector<std::string> written;
  for (auto& o : result.outputs) {
    ResultTable stamped(o.table.columns());
    stamped.set_meta("tool", "curvwork");
    stamped.set_meta("version", CURVWORK_VERSION);
    stamped.set_meta("command", config.command);
    stamped.set_meta("config_hash", config.config_hash);
    stamped.set_meta("seed", config.seed ? std::to_string(*config.seed) : "none");
    for (const auto& [k, v] : o.table.metadata()) stamped.set_meta(k, v);
    for (const auto& row : o.table.rows()) stamped.add_row(row);
    o.table = std::move(stamped);

    const fs::path csv = fs::path(config.out_dir) / (o.name + ".csv");
    o.table.write_csv(csv.string());
    written.push_back(csv.string());
    if (config.plot && o.plot) {
      const fs::path gp = fs::path(config.out_dir) / (o.name + ".gp");
      std::ofstream s(gp, std::ios::binary | std::ios::trunc);
      if (!s) throw ValidationError("cannot write '" + gp.string() + "'");
      s << gnuplot_script(o.table, o.name + ".csv", *o.plot);
      written.push_back(gp.string());
    }
  }
  return written;
}

}  // namespace curvwork::cli
