#include "curvwork/stochastic.hpp"

#include "curvwork/errors.hpp"
#include "curvwork/parallel.hpp"
#include "curvwork/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace curvwork::stochastic {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Vec2 reflect_into(Vec2 p, const Box& box) {
  for (int d = 0; d < 2; ++d) {
    const double lo = box.lower(d);
    const double hi = box.upper(d);
    const double width = hi - lo;
    // Fold repeatedly; a single step rarely crosses more than one wall.
    for (int guard = 0; guard < 64 && (p(d) < lo || p(d) > hi); ++guard) {
      if (p(d) < lo) p(d) = 2.0 * lo - p(d);
      if (p(d) > hi) p(d) = 2.0 * hi - p(d);
    }
    if (p(d) < lo || p(d) > hi) p(d) = lo + std::fmod(std::abs(p(d) - lo), width);
  }
  return p;
}

Vec2 confine(const Vec2& p, const std::optional<Box>& domain, BoundaryMode mode) {
  if (!domain || domain->contains(p)) return p;
  if (mode == BoundaryMode::Reject) throw DomainExit("simulate_trajectory: path left the domain");
  return reflect_into(p, *domain);
}

void check_box(const std::optional<Box>& domain, const Vec2& lambda0) {
  if (!domain) return;
  if (!(domain->upper.array() > domain->lower.array()).all()) {
    throw ValidationError("simulate_trajectory: domain box is empty");
  }
  if (!domain->contains(lambda0)) throw ValidationError("simulate_trajectory: start point outside the domain");
}

std::vector<Vec2> draw_increments(std::size_t steps, double dt, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(dt);
  std::vector<Vec2> out(steps);
  for (auto& db : out) {
    const double a = normal(rng);
    const double b = normal(rng);
    db = Vec2(a, b) * scale;
  }
  return out;
}

double jackknife_mean_se(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double total = 0.0;
  for (double v : x) total += v;
  const double nd = static_cast<double>(n);
  double mean_loo = 0.0;
  for (double v : x) mean_loo += (total - v) / (nd - 1.0);
  mean_loo /= nd;
  double acc = 0.0;
  for (double v : x) {
    const double d = (total - v) / (nd - 1.0) - mean_loo;
    acc += d * d;
  }
  return std::sqrt((nd - 1.0) / nd * acc);
}

}  // namespace

Connection constant_connection(const Vec2& a) {
  return [a](const Vec2&) { return a; };
}

Connection thermal_connection(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("thermal_connection: beta must be >= 0");
  return [beta](const Vec2& l) -> Vec2 {
    const double eps = std::hypot(l.x(), l.y());
    const double x = 0.5 * beta * eps;
    // tanh(x)/eps -> beta/2 at the level crossing, where grad F is smooth.
    const double ratio = x < 1e-8 ? 0.5 * beta : std::tanh(x) / eps;
    return -0.5 * ratio * l;
  };
}

Connection coherent_connection(double gamma_down, double gamma_up) {
  if (!(gamma_down >= 0.0) || !(gamma_up >= 0.0) || !(gamma_down + gamma_up > 0.0)) {
    throw ValidationError("coherent_connection: rates must be >= 0 with a positive sum");
  }
  return [gamma_down, gamma_up](const Vec2& l) -> Vec2 {
    const auto b = quantum::analytic_ness_bloch(l.x(), l.y(), gamma_down, gamma_up);
    return Vec2(0.5 * b.z, 0.5 * b.x);
  };
}

Connection gauge_shifted(Connection base, ScalarField phi, double h) {
  if (!(h > 0.0)) throw ValidationError("gauge_shifted: step must be positive");
  return [base = std::move(base), phi = std::move(phi), h](const Vec2& l) -> Vec2 {
    Vec2 grad;
    for (int d = 0; d < 2; ++d) {
      Vec2 plus = l;
      Vec2 minus = l;
      plus(d) += h;
      minus(d) -= h;
      grad(d) = (phi(plus) - phi(minus)) / (2.0 * h);
    }
    return base(l) + grad;
  };
}

ControlSDE ControlSDE::isotropic_constant(double diffusion, const Vec2& velocity) {
  if (!(diffusion >= 0.0) || !std::isfinite(diffusion)) throw ValidationError("ControlSDE: D must be >= 0");
  ControlSDE s;
  s.isotropic = true;
  s.diffusion = diffusion;
  if (velocity.squaredNorm() > 0.0) s.drift = [velocity](const Vec2&) { return velocity; };
  return s;
}

ControlSDE ControlSDE::general(std::function<Vec2(const Vec2&)> drift, std::function<Mat2(const Vec2&)> noise) {
  if (!noise) throw ValidationError("ControlSDE: noise matrix required");
  ControlSDE s;
  s.isotropic = false;
  s.drift = std::move(drift);
  s.noise = std::move(noise);
  return s;
}

Vec2 ControlSDE::velocity(const Vec2& lambda) const { return drift ? drift(lambda) : Vec2::Zero(); }

Mat2 ControlSDE::sigma(const Vec2& lambda) const {
  if (isotropic) return std::sqrt(2.0 * diffusion) * Mat2::Identity();
  return noise(lambda);
}

Mat2 ControlSDE::diffusion_tensor(const Vec2& lambda) const {
  const Mat2 s = sigma(lambda);
  return s * s.transpose();
}

bool Box::contains(const Vec2& p) const { return (p.array() >= lower.array()).all() && (p.array() <= upper.array()).all(); }

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  return splitmix64(base_seed ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

std::pair<std::size_t, double> step_grid(double t_final, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("step_grid: dt must be positive");
  if (!(t_final >= dt) || !std::isfinite(t_final)) throw ValidationError("step_grid: t_final must be >= dt");
  const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
  return {steps, t_final / static_cast<double>(steps)};
}

WorkTrajectory simulate_with_increments(const ControlSDE& sde, const Connection& connection, const Vec2& lambda0,
                                        double dt, const std::vector<Vec2>& increments,
                                        const std::optional<Box>& domain, BoundaryMode boundary) {
  if (!(dt > 0.0)) throw ValidationError("simulate_with_increments: dt must be positive");
  if (!connection) throw ValidationError("simulate_with_increments: connection required");
  check_box(domain, lambda0);
  WorkTrajectory tr;
  const std::size_t steps = increments.size();
  tr.time.resize(steps + 1);
  tr.lambda.resize(steps + 1);
  tr.work.resize(steps + 1);
  tr.time[0] = 0.0;
  tr.lambda[0] = lambda0;
  tr.work[0] = 0.0;
  Vec2 l = lambda0;
  double w = 0.0;
  for (std::size_t n = 0; n < steps; ++n) {
    const Vec2& db = increments[n];
    const Vec2 v0 = sde.velocity(l);
    const Mat2 s0 = sde.sigma(l);
    const Vec2 pred = confine(l + v0 * dt + s0 * db, domain, boundary);
    const Vec2 v1 = sde.velocity(pred);
    const Mat2 s1 = sde.sigma(pred);
    const Vec2 next = confine(l + 0.5 * (v0 + v1) * dt + 0.5 * (s0 + s1) * db, domain, boundary);
    const Vec2 step = next - l;
    w += connection(0.5 * (l + next)).dot(step);
    l = next;
    tr.time[n + 1] = static_cast<double>(n + 1) * dt;
    tr.lambda[n + 1] = l;
    tr.work[n + 1] = w;
  }
  return tr;
}

WorkTrajectory simulate_trajectory(const ControlSDE& sde, const Connection& connection, const Vec2& lambda0,
                                   const TrajectoryOptions& options, std::uint64_t seed) {
  const auto [steps, dt] = step_grid(options.t_final, options.dt);
  WorkTrajectory tr = simulate_with_increments(sde, connection, lambda0, dt, draw_increments(steps, dt, seed),
                                               options.domain, options.boundary);
  tr.seed = seed;
  return tr;
}

Histogram make_histogram(const std::vector<double>& samples, std::size_t bins) {
  if (bins < 1) throw ValidationError("make_histogram: need at least one bin");
  Histogram h;
  h.counts.assign(bins, 0);
  h.edges.resize(bins + 1);
  if (samples.empty()) {
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = static_cast<double>(b) / static_cast<double>(bins);
    return h;
  }
  auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges[bins] = hi;
  for (double x : samples) {
    if (!(x >= lo && x <= hi)) continue;
    auto b = static_cast<std::size_t>((x - lo) / width);
    if (b >= bins) b = bins - 1;
    ++h.counts[b];
  }
  return h;
}

SampleStats sample_stats(const std::vector<double>& samples) {
  SampleStats s;
  s.n = samples.size();
  if (s.n == 0) return s;
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(s.n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(s.n);
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.mean = mean;
  if (s.n > 1) {
    s.variance = m2 * n / (n - 1.0);
    s.se_mean = std::sqrt(s.variance / n);
    s.se_variance = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
  }
  s.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  return s;
}

WorkEnsemble ensemble(const ControlSDE& sde, const Connection& connection, const Vec2& lambda0,
                      const TrajectoryOptions& trajectory, const EnsembleOptions& options) {
  if (options.samples < 1) throw ValidationError("ensemble: need at least one trajectory");
  const auto [steps, dt] = step_grid(trajectory.t_final, trajectory.dt);
  (void)steps;
  check_box(trajectory.domain, lambda0);
  const std::size_t n = options.samples;
  std::vector<double> work(n, 0.0);
  std::vector<Vec2> final_lambda(n, Vec2::Zero());
  std::vector<char> rejected(n, 0);
  parallel_for(n, options.threads, [&](std::size_t i) {
    try {
      const WorkTrajectory tr = simulate_trajectory(sde, connection, lambda0, trajectory, derive_seed(options.base_seed, i));
      work[i] = tr.work.back();
      final_lambda[i] = tr.lambda.back();
    } catch (const DomainExit&) {
      rejected[i] = 1;
    }
  });
  WorkEnsemble out;
  for (std::size_t i = 0; i < n; ++i) {
    if (rejected[i]) {
      ++out.rejected;
      continue;
    }
    out.final_work.push_back(work[i]);
    out.final_lambda.push_back(final_lambda[i]);
  }
  (void)dt;
  out.stats = sample_stats(out.final_work);
  out.histogram = make_histogram(out.final_work, options.histogram_bins);
  return out;
}

std::vector<Vec2> pinned_path(const PinnedPathSpec& spec, std::uint64_t seed) {
  if (!spec.base) throw ValidationError("pinned_path: base path required");
  if (spec.steps < 2) throw ValidationError("pinned_path: need at least two steps");
  if (!(spec.noise >= 0.0)) throw ValidationError("pinned_path: noise must be >= 0");
  const std::size_t n = spec.steps;
  const double ds = 1.0 / static_cast<double>(n);
  const std::vector<Vec2> db = draw_increments(n, ds, seed);
  std::vector<Vec2> walk(n + 1, Vec2::Zero());
  for (std::size_t k = 0; k < n; ++k) walk[k + 1] = walk[k] + db[k];
  std::vector<Vec2> path(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double s = static_cast<double>(k) * ds;
    // Bridge: B(s) = W(s) - s W(1); exact zeros at both ends.
    const Vec2 bridge = (k == 0 || k == n) ? Vec2::Zero() : Vec2(walk[k] - s * walk[n]);
    path[k] = spec.base(s) + spec.noise * bridge;
  }
  path[0] = spec.base(0.0);
  path[n] = spec.base(1.0);
  return path;
}

double polyline_work(const Connection& connection, const std::vector<Vec2>& path) {
  double w = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    w += connection(0.5 * (path[k] + path[k + 1])).dot(path[k + 1] - path[k]);
  }
  return w;
}

double polyline_work_gauss(const Connection& connection, const std::vector<Vec2>& path) {
  static const double x = std::sqrt(0.6);
  static const double nodes[3] = {0.5 * (1.0 - x), 0.5, 0.5 * (1.0 + x)};
  static const double weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  double w = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const Vec2 d = path[k + 1] - path[k];
    double seg = 0.0;
    for (int q = 0; q < 3; ++q) seg += weights[q] * connection(path[k] + nodes[q] * d).dot(d);
    w += seg;
  }
  return w;
}

JarzynskiReport jarzynski_check(const Connection& connection, const ScalarField& free_energy,
                                const JarzynskiSpec& spec) {
  if (spec.samples < 2) throw ValidationError("jarzynski_check: need at least two samples");
  if (!(spec.beta >= 0.0) || !std::isfinite(spec.beta)) throw ValidationError("jarzynski_check: beta must be >= 0");
  if (spec.paths.steps < 4 || spec.paths.steps % 2 != 0) {
    throw ValidationError("jarzynski_check: steps must be even and >= 4");
  }
  if (!spec.paths.base) throw ValidationError("jarzynski_check: base path required");
  const double tol = 1e-12 * std::max(1.0, std::max(spec.start.norm(), spec.end.norm()));
  if ((spec.paths.base(0.0) - spec.start).norm() > tol || (spec.paths.base(1.0) - spec.end).norm() > tol) {
    throw EndpointMismatch("jarzynski_check: base path does not join the declared endpoints");
  }

  JarzynskiReport r;
  r.samples = spec.samples;
  if (spec.beta > 0.0) {
    r.delta_f = free_energy(spec.end) - free_energy(spec.start);
    r.target = std::exp(-spec.beta * r.delta_f);
  } else {
    r.target = 1.0;
  }

  std::vector<double> x(spec.samples);
  std::vector<double> dx(spec.samples);
  std::vector<double> w(spec.samples);
  parallel_for(spec.samples, spec.threads, [&](std::size_t i) {
    const std::vector<Vec2> path = pinned_path(spec.paths, derive_seed(spec.base_seed, i));
    std::vector<Vec2> coarse;
    coarse.reserve(path.size() / 2 + 1);
    for (std::size_t k = 0; k < path.size(); k += 2) coarse.push_back(path[k]);
    const double wf = polyline_work_gauss(connection, path);
    const double wc = polyline_work_gauss(connection, coarse);
    w[i] = wf;
    x[i] = std::exp(-spec.beta * wf);
    dx[i] = x[i] - std::exp(-spec.beta * wc);
  });
  double sum = 0.0, sum_w = 0.0, sum_d2 = 0.0;
  for (std::size_t i = 0; i < spec.samples; ++i) {
    sum += x[i];
    sum_w += w[i];
    sum_d2 += dx[i] * dx[i];
  }
  const double n = static_cast<double>(spec.samples);
  r.estimate = sum / n;
  r.mean_work = sum_w / n;
  r.standard_error = jackknife_mean_se(x);
  r.discretization = std::sqrt(sum_d2 / n);
  const double err = r.estimate - r.target;
  const double scale = std::hypot(r.standard_error, r.discretization);
  if (scale > 0.0) {
    r.z = err / scale;
  } else {
    r.z = err == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), err);
  }
  return r;
}

GaugeShiftReport gauge_shift_experiment(const Connection& connection, const ScalarField& phi,
                                        const PinnedPathSpec& loop, const PinnedPathSpec& open,
                                        std::size_t samples, std::uint64_t base_seed) {
  if (samples < 1) throw ValidationError("gauge_shift_experiment: need at least one sample");
  if (!loop.base || !open.base) throw ValidationError("gauge_shift_experiment: base paths required");
  const Vec2 l0 = loop.base(0.0);
  if ((loop.base(1.0) - l0).norm() > 1e-12 * std::max(1.0, l0.norm())) {
    throw EndpointMismatch("gauge_shift_experiment: loop base path is not closed");
  }
  const Connection shifted = gauge_shifted(connection, phi);
  GaugeShiftReport r;
  r.samples = samples;
  r.open_expected_shift = phi(open.base(1.0)) - phi(open.base(0.0));
  double loop_sum = 0.0, loop_sum_shifted = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto lp = pinned_path(loop, derive_seed(base_seed, 2 * i));
    const double w = polyline_work(connection, lp);
    const double ws = polyline_work(shifted, lp);
    loop_sum += w;
    loop_sum_shifted += ws;
    r.loop_max_shift = std::max(r.loop_max_shift, std::abs(ws - w));
    const auto op = pinned_path(open, derive_seed(base_seed, 2 * i + 1));
    const double d = polyline_work(shifted, op) - polyline_work(connection, op);
    r.open_max_deviation = std::max(r.open_max_deviation, std::abs(d - r.open_expected_shift));
  }
  r.loop_mean_work = loop_sum / static_cast<double>(samples);
  r.loop_mean_work_shifted = loop_sum_shifted / static_cast<double>(samples);
  return r;
}

}  // namespace curvwork::stochastic
