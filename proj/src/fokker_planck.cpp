#include "curvwork/errors.hpp"
#include "curvwork/kernels.hpp"
#include "curvwork/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <span>

namespace curvwork::stochastic {
namespace {

struct Move {
  std::ptrdiff_t dest = -1;  // cell index, -1 when it leaves the grid
  double rate = 0.0;
  double dw = 0.0;
};

struct Lattice {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<std::vector<Move>> moves;  // per cell
  std::vector<double> out_rate;
  std::vector<double> bw;
  std::vector<Vec2> center;
  double max_rate = 0.0;
};

void validate_grid(const GridSpec& g) {
  if (g.cells_x < 3 || g.cells_y < 3) throw ValidationError("GridSpec: need at least 3 cells per axis");
  if (!(g.upper.x() > g.lower.x()) || !(g.upper.y() > g.lower.y())) throw ValidationError("GridSpec: empty box");
  if (!(g.w_spacing > 0.0) || !std::isfinite(g.w_spacing)) throw ValidationError("GridSpec: W spacing must be positive");
  if (g.w_half_width < 1) throw ValidationError("GridSpec: W range must hold more than one node");
}

Lattice build_lattice(const ControlSDE& sde, const Connection& connection, const GridSpec& g) {
  if (!sde.isotropic) throw ValidationError("fokker_planck_solve: only isotropic constant diffusion is supported");
  if (!connection) throw ValidationError("fokker_planck_solve: connection required");
  Lattice lat;
  lat.nx = g.cells_x;
  lat.ny = g.cells_y;
  const double h[2] = {g.hx(), g.hy()};
  const std::size_t cells = lat.nx * lat.ny;
  lat.moves.resize(cells);
  lat.out_rate.assign(cells, 0.0);
  lat.bw.assign(cells, 0.0);
  lat.center.resize(cells);
  const double diff = sde.diffusion;
  for (std::size_t iy = 0; iy < lat.ny; ++iy) {
    for (std::size_t ix = 0; ix < lat.nx; ++ix) {
      const std::size_t c = iy * lat.nx + ix;
      lat.center[c] = Vec2(g.lower.x() + (static_cast<double>(ix) + 0.5) * h[0],
                           g.lower.y() + (static_cast<double>(iy) + 0.5) * h[1]);
    }
  }
  for (std::size_t iy = 0; iy < lat.ny; ++iy) {
    for (std::size_t ix = 0; ix < lat.nx; ++ix) {
      const std::size_t c = iy * lat.nx + ix;
      const Vec2 x = lat.center[c];
      const Vec2 v = sde.velocity(x);
      for (int d = 0; d < 2; ++d) {
        for (int dir : {-1, 1}) {
          // Centred drift while both rates stay positive, upwind otherwise.
          double rate = diff / (h[d] * h[d]);
          if (std::abs(v(d)) * h[d] <= 2.0 * diff) {
            rate += dir * v(d) / (2.0 * h[d]);
          } else if (v(d) * dir > 0.0) {
            rate += std::abs(v(d)) / h[d];
          }
          if (rate == 0.0) continue;
          Vec2 step = Vec2::Zero();
          step(d) = dir * h[d];
          Move m;
          m.rate = rate;
          m.dw = connection(x + 0.5 * step).dot(step);
          const std::ptrdiff_t jx = static_cast<std::ptrdiff_t>(ix) + (d == 0 ? dir : 0);
          const std::ptrdiff_t jy = static_cast<std::ptrdiff_t>(iy) + (d == 1 ? dir : 0);
          if (jx >= 0 && jy >= 0 && jx < static_cast<std::ptrdiff_t>(lat.nx) &&
              jy < static_cast<std::ptrdiff_t>(lat.ny)) {
            m.dest = jy * static_cast<std::ptrdiff_t>(lat.nx) + jx;
          }
          lat.moves[c].push_back(m);
          lat.out_rate[c] += rate;
        }
      }
      lat.max_rate = std::max(lat.max_rate, lat.out_rate[c]);
      // b_W = A.v + (1/2) D^{ij} d_i A_j with D^{ij} = 2 D delta^{ij}.
      double div = 0.0;
      for (int d = 0; d < 2; ++d) {
        const double e = 1e-5 * std::max(1.0, std::abs(x(d)));
        Vec2 plus = x;
        Vec2 minus = x;
        plus(d) += e;
        minus(d) -= e;
        div += (connection(plus)(d) - connection(minus)(d)) / (2.0 * e);
      }
      lat.bw[c] = connection(x).dot(v) + diff * div;
    }
  }
  return lat;
}

std::pair<std::size_t, double> stable_step(const Lattice& lat, const FPOptions& options) {
  if (!(options.t_final > 0.0) || !std::isfinite(options.t_final)) {
    throw ValidationError("fokker_planck_solve: t_final must be positive");
  }
  if (!(options.cfl > 0.0) || options.cfl > 1.0) throw ValidationError("fokker_planck_solve: cfl must be in (0, 1]");
  if (options.dt < 0.0) throw ValidationError("fokker_planck_solve: dt must be >= 0");
  double dt = options.t_final;
  if (lat.max_rate > 0.0) dt = std::min(dt, options.cfl / lat.max_rate);
  if (options.dt > 0.0) dt = std::min(dt, options.dt);
  const auto steps = static_cast<std::size_t>(std::ceil(options.t_final / dt - 1e-12));
  return {steps, options.t_final / static_cast<double>(steps)};
}

std::size_t start_cell(const GridSpec& g, const Vec2& lambda0) {
  const double fx = (lambda0.x() - g.lower.x()) / g.hx();
  const double fy = (lambda0.y() - g.lower.y()) / g.hy();
  if (!(fx >= 0.0 && fy >= 0.0 && fx < static_cast<double>(g.cells_x) && fy < static_cast<double>(g.cells_y))) {
    throw ValidationError("fokker_planck_solve: start point outside the grid");
  }
  return static_cast<std::size_t>(fy) * g.cells_x + static_cast<std::size_t>(fx);
}

FPRecord record(const JointDensity& rho, const Lattice& lat, double time) {
  const std::size_t nw = rho.grid.w_nodes();
  const double origin = -static_cast<double>(rho.grid.w_half_width) * rho.grid.w_spacing;
  FPRecord r;
  r.time = time;
  double first = 0.0, second = 0.0, bw = 0.0;
  Vec2 ml = Vec2::Zero();
  const std::size_t cells = lat.nx * lat.ny;
  for (std::size_t c = 0; c < cells; ++c) {
    const std::span<const double> row(rho.values.data() + c * nw, nw);
    const auto m = kernels::row_moments(row, origin, rho.grid.w_spacing);
    r.mass += m.mass;
    first += m.first;
    second += m.second;
    bw += m.mass * lat.bw[c];
    ml += m.mass * lat.center[c];
  }
  r.leakage = 1.0 - r.mass;
  if (r.mass > 0.0) {
    r.mean_w = first / r.mass;
    r.var_w = std::max(0.0, second / r.mass - r.mean_w * r.mean_w);
    r.mean_bw = bw / r.mass;
    r.mean_lambda = ml / r.mass;
  }
  return r;
}

void check_health(const std::vector<double>& values, double& min_value) {
  double lo = 0.0;
  double total = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw InstabilityDetected("fokker_planck_solve: non-finite density");
    lo = std::min(lo, v);
    total += v;
  }
  min_value = std::min(min_value, lo);
  if (lo < -1e-8) throw InstabilityDetected("fokker_planck_solve: negative density " + std::to_string(lo));
  if (total > 1.0 + 1e-8) throw InstabilityDetected("fokker_planck_solve: mass grew to " + std::to_string(total));
}

}  // namespace

double JointDensity::w_node(std::size_t k) const {
  return (static_cast<double>(k) - static_cast<double>(grid.w_half_width)) * grid.w_spacing;
}

std::vector<double> JointDensity::w_marginal() const {
  const std::size_t nw = grid.w_nodes();
  std::vector<double> out(nw, 0.0);
  for (std::size_t c = 0; c < grid.cells_x * grid.cells_y; ++c) {
    for (std::size_t k = 0; k < nw; ++k) out[k] += values[c * nw + k];
  }
  return out;
}

std::vector<double> JointDensity::lambda_marginal() const {
  const std::size_t nw = grid.w_nodes();
  std::vector<double> out(grid.cells_x * grid.cells_y, 0.0);
  for (std::size_t c = 0; c < out.size(); ++c) {
    for (std::size_t k = 0; k < nw; ++k) out[c] += values[c * nw + k];
  }
  return out;
}

GridSpec default_grid(const ControlSDE& sde, const Connection& connection, const Vec2& lambda0, double t_final,
                      std::size_t cells) {
  if (!sde.isotropic || !(sde.diffusion > 0.0)) {
    throw ValidationError("default_grid: needs isotropic diffusion with D > 0");
  }
  if (!(t_final > 0.0)) throw ValidationError("default_grid: t_final must be positive");
  if (cells < 5) throw ValidationError("default_grid: need at least 5 cells per axis");
  cells += 1 - cells % 2;  // odd, so lambda0 is a cell centre
  const Vec2 v = sde.velocity(lambda0);
  const double spread = 6.0 * std::sqrt(2.0 * sde.diffusion * t_final);
  GridSpec g;
  g.cells_x = cells;
  g.cells_y = cells;
  Vec2 half;
  for (int d = 0; d < 2; ++d) half(d) = spread + std::abs(v(d)) * t_final;
  g.lower = lambda0 - half;
  g.upper = lambda0 + half;
  double a_max = 0.0;
  for (int i = 0; i <= 8; ++i) {
    for (int j = 0; j <= 8; ++j) {
      const Vec2 p = g.lower + Vec2(g.upper - g.lower).cwiseProduct(Vec2(i / 8.0, j / 8.0));
      a_max = std::max(a_max, connection(p).norm());
    }
  }
  if (a_max == 0.0) {
    g.w_spacing = std::min(g.hx(), g.hy());
    g.w_half_width = 4;
    return g;
  }
  const double h = std::min(g.hx(), g.hy());
  g.w_spacing = h * a_max / 8.0;
  const double w_range = 6.0 * std::sqrt(2.0 * sde.diffusion * t_final) * a_max + a_max * v.norm() * t_final;
  g.w_half_width = static_cast<std::size_t>(std::ceil(w_range / g.w_spacing)) + 1;
  return g;
}

JointDensity fokker_planck_solve(const ControlSDE& sde, const Connection& connection, const Vec2& lambda0,
                                 const GridSpec& grid, const FPOptions& options) {
  validate_grid(grid);
  if (options.record_every < 1) throw ValidationError("fokker_planck_solve: record_every must be >= 1");
  const Lattice lat = build_lattice(sde, connection, grid);
  const auto [steps, dt] = stable_step(lat, options);
  const std::size_t nw = grid.w_nodes();
  const std::size_t cells = lat.nx * lat.ny;

  JointDensity rho;
  rho.grid = grid;
  rho.dt = dt;
  rho.steps = steps;
  rho.values.assign(cells * nw, 0.0);
  rho.values[start_cell(grid, lambda0) * nw + grid.w_half_width] = 1.0;

  // Precomputed per-move (shift, w0, w1) at this dt.
  struct Deposit {
    std::ptrdiff_t dest;
    std::ptrdiff_t shift;
    double w0;
    double w1;
  };
  std::vector<std::vector<Deposit>> deposits(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    for (const Move& m : lat.moves[c]) {
      if (m.dest < 0) continue;
      const double u = m.dw / grid.w_spacing;
      const double s = std::floor(u);
      const double f = u - s;
      deposits[c].push_back({m.dest, static_cast<std::ptrdiff_t>(s), m.rate * dt * (1.0 - f), m.rate * dt * f});
    }
  }

  std::vector<double> next(rho.values.size());
  rho.trace.push_back(record(rho, lat, 0.0));
  for (std::size_t n = 0; n < steps; ++n) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
      const std::span<const double> src(rho.values.data() + c * nw, nw);
      const std::span<double> stay(next.data() + c * nw, nw);
      kernels::shift_axpy(stay, src, 0, 1.0 - lat.out_rate[c] * dt, 0.0);
      for (const Deposit& d : deposits[c]) {
        const std::span<double> dst(next.data() + static_cast<std::size_t>(d.dest) * nw, nw);
        kernels::shift_axpy(dst, src, d.shift, d.w0, d.w1);
      }
    }
    rho.values.swap(next);
    if ((n + 1) % options.record_every == 0 || n + 1 == steps) {
      check_health(rho.values, rho.min_value);
      rho.trace.push_back(record(rho, lat, static_cast<double>(n + 1) * dt));
    }
  }
  return rho;
}

TiltedField tilted_evolve(const ControlSDE& sde, const Connection& connection, double chi, const Vec2& lambda0,
                          const GridSpec& grid, const FPOptions& options) {
  validate_grid(grid);
  if (!std::isfinite(chi)) throw ValidationError("tilted_evolve: chi must be finite");
  if (options.record_every < 1) throw ValidationError("tilted_evolve: record_every must be >= 1");
  const Lattice lat = build_lattice(sde, connection, grid);
  const auto [steps, dt] = stable_step(lat, options);
  const std::size_t cells = lat.nx * lat.ny;

  TiltedField z;
  z.grid = grid;
  z.chi = chi;
  z.dt = dt;
  z.steps = steps;
  z.values.assign(cells, 0.0);
  z.values[start_cell(grid, lambda0)] = 1.0;

  std::vector<std::vector<std::pair<std::size_t, double>>> weights(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    for (const Move& m : lat.moves[c]) {
      if (m.dest < 0) continue;
      weights[c].push_back({static_cast<std::size_t>(m.dest), m.rate * dt * std::exp(-chi * m.dw)});
    }
  }
  auto integral = [&] {
    double s = 0.0;
    for (double v : z.values) s += v;
    return s;
  };
  z.trace.push_back({0.0, 1.0});
  std::vector<double> next(cells);
  for (std::size_t n = 0; n < steps; ++n) {
    for (std::size_t c = 0; c < cells; ++c) next[c] = (1.0 - lat.out_rate[c] * dt) * z.values[c];
    for (std::size_t c = 0; c < cells; ++c) {
      const double v = z.values[c];
      if (v == 0.0) continue;
      for (const auto& [dest, w] : weights[c]) next[dest] += w * v;
    }
    z.values.swap(next);
    if ((n + 1) % options.record_every == 0 || n + 1 == steps) {
      const double s = integral();
      if (!std::isfinite(s)) throw InstabilityDetected("tilted_evolve: non-finite field");
      z.trace.push_back({static_cast<double>(n + 1) * dt, s});
    }
  }
  return z;
}

}  // namespace curvwork::stochastic
