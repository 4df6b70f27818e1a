#pragma once

// Fluctuating geometric work: control-manifold SDE with Stratonovich work,
// Monte Carlo ensembles, endpoint-pinned Jarzynski ensembles, the joint
// (lambda, W) density and the tilted generator on a lattice.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace curvwork::stochastic {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// lambda -> A(lambda) on a two-coordinate chart.
using Connection = std::function<Vec2(const Vec2&)>;
using ScalarField = std::function<double(const Vec2&)>;

Connection constant_connection(const Vec2& a);
/// A = grad F with F the thermal free energy, on (omega, g) at fixed beta.
Connection thermal_connection(double beta);
/// A = (z*, x*)/2 from the closed-form fixed-basis steady state.
Connection coherent_connection(double gamma_down, double gamma_up);
/// A + grad(phi), gradient by central differences.
Connection gauge_shifted(Connection base, ScalarField phi, double h = 1e-6);

/// d lambda = v dt + sigma dB. Diffusion tensor D^{ij} = sigma sigma^T;
/// isotropic means sigma = sqrt(2 D) I.
struct ControlSDE {
  std::function<Vec2(const Vec2&)> drift;  // empty: zero drift
  std::function<Mat2(const Vec2&)> noise;  // used when !isotropic
  bool isotropic = true;
  double diffusion = 0.0;                  // D when isotropic

  static ControlSDE isotropic_constant(double diffusion, const Vec2& velocity = Vec2::Zero());
  static ControlSDE general(std::function<Vec2(const Vec2&)> drift, std::function<Mat2(const Vec2&)> noise);

  Vec2 velocity(const Vec2& lambda) const;
  Mat2 sigma(const Vec2& lambda) const;
  Mat2 diffusion_tensor(const Vec2& lambda) const;
  bool has_constant_isotropic_noise() const { return isotropic; }
};

enum class BoundaryMode { Reflect, Reject };

struct Box {
  Vec2 lower = Vec2::Constant(-1e300);
  Vec2 upper = Vec2::Constant(1e300);
  bool contains(const Vec2& p) const;
};

struct TrajectoryOptions {
  double t_final = 1.0;
  double dt = 1e-2;
  std::optional<Box> domain;
  BoundaryMode boundary = BoundaryMode::Reflect;
};

struct WorkTrajectory {
  std::vector<double> time;
  std::vector<Vec2> lambda;
  std::vector<double> work;  // W_0 = 0
  std::uint64_t seed = 0;
};

/// splitmix64 of (base, index); the per-trajectory seed used by ensembles.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

/// Number of steps and the step actually used for (t_final, dt).
std::pair<std::size_t, double> step_grid(double t_final, double dt);

/// Heun predictor-corrector for lambda; work increment A(midpoint) . dlambda.
/// Throws DomainExit in Reject mode when a step leaves the domain.
WorkTrajectory simulate_trajectory(const ControlSDE& sde, const Connection& connection, const Vec2& lambda0,
                                   const TrajectoryOptions& options, std::uint64_t seed);

/// Same integrator driven by explicit Brownian increments (one per step).
WorkTrajectory simulate_with_increments(const ControlSDE& sde, const Connection& connection, const Vec2& lambda0,
                                        double dt, const std::vector<Vec2>& increments,
                                        const std::optional<Box>& domain = std::nullopt,
                                        BoundaryMode boundary = BoundaryMode::Reflect);

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> counts;
};

/// Equal-width bins over [lo, hi]; samples outside are dropped.
Histogram make_histogram(const std::vector<double>& samples, std::size_t bins);

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double se_mean = 0.0;
  double se_variance = 0.0;
};

SampleStats sample_stats(const std::vector<double>& samples);

struct EnsembleOptions {
  std::size_t samples = 1000;
  std::uint64_t base_seed = 0;
  unsigned threads = 1;
  std::size_t histogram_bins = 50;
};

struct WorkEnsemble {
  SampleStats stats;
  Histogram histogram;
  std::vector<double> final_work;    // index order
  std::vector<Vec2> final_lambda;
  std::size_t rejected = 0;          // Reject mode only; excluded from stats
};

WorkEnsemble ensemble(const ControlSDE& sde, const Connection& connection, const Vec2& lambda0,
                      const TrajectoryOptions& trajectory, const EnsembleOptions& options);

/// Paths lambda(s) = base(s) + noise * B(s), s in [0, 1], with B a standard
/// two-dimensional Brownian bridge so every path shares the endpoints.
struct PinnedPathSpec {
  std::function<Vec2(double)> base;
  double noise = 0.1;
  std::size_t steps = 64;
};

std::vector<Vec2> pinned_path(const PinnedPathSpec& spec, std::uint64_t seed);

/// Midpoint-rule work along a polyline.
double polyline_work(const Connection& connection, const std::vector<Vec2>& path);
/// Three-point Gauss-Legendre per segment.
double polyline_work_gauss(const Connection& connection, const std::vector<Vec2>& path);

struct JarzynskiSpec {
  PinnedPathSpec paths;
  Vec2 start = Vec2::Zero();
  Vec2 end = Vec2::Zero();
  double beta = 1.0;
  std::size_t samples = 10000;
  std::uint64_t base_seed = 0;
  unsigned threads = 1;
};

struct JarzynskiReport {
  double estimate = 0.0;        // <exp(-beta W)>
  double target = 0.0;          // exp(-beta dF)
  double delta_f = 0.0;
  double mean_work = 0.0;
  double standard_error = 0.0;  // jackknife
  double discretization = 0.0;  // RMS change of exp(-beta W) between n and n/2 segments
  double z = 0.0;
  std::size_t samples = 0;
};

/// Throws EndpointMismatch unless base(0) = start and base(1) = end.
JarzynskiReport jarzynski_check(const Connection& connection, const ScalarField& free_energy,
                                const JarzynskiSpec& spec);

/// Lattice over (lambda^1, lambda^2) cell centres and W nodes; W = 0 is a node.
struct GridSpec {
  Vec2 lower = Vec2::Constant(-1.0);
  Vec2 upper = Vec2::Constant(1.0);
  std::size_t cells_x = 41;
  std::size_t cells_y = 41;
  double w_spacing = 0.01;
  std::size_t w_half_width = 100;  // nodes k = -half..half

  double hx() const { return (upper.x() - lower.x()) / static_cast<double>(cells_x); }
  double hy() const { return (upper.y() - lower.y()) / static_cast<double>(cells_y); }
  std::size_t w_nodes() const { return 2 * w_half_width + 1; }
};

/// +-6 standard deviations in lambda around lambda0 (plus drift) and in W;
/// spacing h from `cells` per axis and W spacing min(h, ...) * max|A| / 8.
GridSpec default_grid(const ControlSDE& sde, const Connection& connection, const Vec2& lambda0, double t_final,
                      std::size_t cells = 61);

struct FPOptions {
  double t_final = 1.0;
  double dt = 0.0;                 // 0: largest CFL-stable step
  double cfl = 0.9;                // dt * max out-rate bound
  std::size_t record_every = 1;
};

struct FPRecord {
  double time = 0.0;
  double mass = 0.0;
  double leakage = 0.0;
  double mean_w = 0.0;
  double var_w = 0.0;
  double mean_bw = 0.0;   // <A.v + (1/2) D^{ij} d_i A_j> under the lambda marginal
  Vec2 mean_lambda = Vec2::Zero();
};

struct JointDensity {
  GridSpec grid;
  std::vector<double> values;  // [(iy * cells_x + ix) * w_nodes + k], cell probabilities
  double dt = 0.0;
  std::size_t steps = 0;
  std::vector<FPRecord> trace;
  double min_value = 0.0;

  std::vector<double> w_marginal() const;
  std::vector<double> lambda_marginal() const;
  double w_node(std::size_t k) const;
};

/// Conservative lattice Markov chain for the joint density: every lambda
/// move (drift and nearest-neighbour diffusion) carries the Stratonovich
/// increment A(midpoint) . dlambda, split linearly between adjacent W nodes.
/// Explicit Euler; dt is shrunk to satisfy the CFL bound. Isotropic SDEs only.
JointDensity fokker_planck_solve(const ControlSDE& sde, const Connection& connection, const Vec2& lambda0,
                                 const GridSpec& grid, const FPOptions& options = {});

struct TiltedRecord {
  double time = 0.0;
  double integral = 0.0;  // sum of Z
};

struct TiltedField {
  GridSpec grid;
  double chi = 0.0;
  std::vector<double> values;  // [iy * cells_x + ix]
  double dt = 0.0;
  std::size_t steps = 0;
  std::vector<TiltedRecord> trace;
};

/// Z(lambda, chi, t) = sum_W exp(-chi W) P on the same lattice: the moves of
/// fokker_planck_solve weighted by exp(-chi dW). Only the lambda part of
/// `grid` is used.
TiltedField tilted_evolve(const ControlSDE& sde, const Connection& connection, double chi, const Vec2& lambda0,
                          const GridSpec& grid, const FPOptions& options = {});

struct GaugeShiftReport {
  double loop_max_shift = 0.0;       // max_i |W'_i - W_i| on closed loops
  double open_expected_shift = 0.0;  // phi(end) - phi(start)
  double open_max_deviation = 0.0;   // max_i |W'_i - W_i - expected|
  double loop_mean_work = 0.0;
  double loop_mean_work_shifted = 0.0;
  std::size_t samples = 0;
};

/// Evaluates both connections on identical pinned paths.
GaugeShiftReport gauge_shift_experiment(const Connection& connection, const ScalarField& phi,
                                        const PinnedPathSpec& loop, const PinnedPathSpec& open,
                                        std::size_t samples, std::uint64_t base_seed);

}  // namespace curvwork::stochastic
