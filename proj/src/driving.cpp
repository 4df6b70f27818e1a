#include "curvwork/cycles.hpp"

#include "curvwork/errors.hpp"

#include <cmath>
#include <numbers>

namespace curvwork::cycles {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using quantum::ComplexMatrix;
using quantum::ComplexVector;

// Generator and work rate at one instant of the drive.
struct Instant {
  ComplexMatrix generator;
  std::vector<ComplexMatrix> dh;  // dH/dlambda^i
  Coords velocity;                // dlambda/dt
};

Instant instant(const geometry::ControlModel& model, const Protocol& protocol, double t, double period) {
  const double theta = kTwoPi * std::fmod(t, period) / period;
  const Coords lambda = protocol.point(theta);
  model.require_in_domain(lambda);
  return {model.liouvillian(lambda).matrix(), model.hamiltonian_derivatives(lambda),
          protocol.tangent(theta) * (kTwoPi / period)};
}

double work_rate(const Instant& in, const ComplexVector& rho_vec, int dim) {
  const ComplexMatrix rho = quantum::unvectorize(rho_vec, dim);
  double rate = 0.0;
  for (std::size_t i = 0; i < in.dh.size(); ++i) {
    if (in.velocity(static_cast<Eigen::Index>(i)) == 0.0) continue;
    rate += (rho * in.dh[i]).trace().real() * in.velocity(static_cast<Eigen::Index>(i));
  }
  return rate;
}

}  // namespace

double predicted_dissipated_work(const geometry::ControlModel& model, const Protocol& protocol, double period,
                                 std::size_t nodes) {
  if (!(period > 0.0)) throw ValidationError("predicted_dissipated_work: period must be positive");
  if (!protocol.closed()) throw ValidationError("predicted_dissipated_work: protocol must be closed");
  if (nodes < 8) throw ValidationError("predicted_dissipated_work: need at least 8 nodes");
  double sum = 0.0;
  for (std::size_t k = 0; k < nodes; ++k) {
    const double theta = kTwoPi * static_cast<double>(k) / static_cast<double>(nodes);
    const Coords lambda = protocol.point(theta);
    const Coords tangent = protocol.tangent(theta);
    const auto metric = geometry::dissipation_metric(model, lambda);
    sum += tangent.dot(metric.tensor * tangent);
  }
  return (kTwoPi / period) * sum * kTwoPi / static_cast<double>(nodes);
}

FiniteRateResult finite_rate_cycle_work(const geometry::ControlModel& model, const Protocol& protocol,
                                        double period, const FiniteRateOptions& options) {
  if (!(period > 0.0) || !std::isfinite(period)) throw ValidationError("finite_rate_cycle_work: period must be positive");
  if (!protocol.closed()) throw ValidationError("finite_rate_cycle_work: protocol must be closed");
  if (options.cycles < 1) throw ValidationError("finite_rate_cycle_work: need at least one cycle");

  const std::size_t steps = options.steps_per_period > 0
                                ? options.steps_per_period
                                : static_cast<std::size_t>(std::ceil(period / 0.01));
  const double dt = period / static_cast<double>(steps);

  const quantum::DensityMatrix rho0 = model.stationary_state(protocol.point(0.0));
  const int dim = static_cast<int>(rho0.matrix().rows());
  ComplexVector rho = quantum::vectorize(rho0.matrix());

  double work_last = 0.0;
  Instant start = instant(model, protocol, 0.0, period);
  for (std::size_t c = 0; c < options.cycles; ++c) {
    double work = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const double t = static_cast<double>(s) * dt;
      const Instant mid = instant(model, protocol, t + 0.5 * dt, period);
      const Instant end = instant(model, protocol, s + 1 == steps ? 0.0 : t + dt, period);

      const ComplexVector k1 = start.generator * rho;
      const ComplexVector r2 = rho + 0.5 * dt * k1;
      const ComplexVector k2 = mid.generator * r2;
      const ComplexVector r3 = rho + 0.5 * dt * k2;
      const ComplexVector k3 = mid.generator * r3;
      const ComplexVector r4 = rho + dt * k3;
      // The end-of-period tangent equals the start tangent for closed loops.
      Instant end_rate = end;
      if (s + 1 == steps) end_rate.velocity = protocol.tangent(kTwoPi) * (kTwoPi / period);
      const ComplexVector k4 = end.generator * r4;

      const double w1 = work_rate(start, rho, dim);
      const double w2 = work_rate(mid, r2, dim);
      const double w3 = work_rate(mid, r3, dim);
      const double w4 = work_rate(end_rate, r4, dim);
      work += dt / 6.0 * (w1 + 2.0 * w2 + 2.0 * w3 + w4);
      rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      start = end;
    }
    if (!rho.allFinite()) throw InstabilityDetected("finite_rate_cycle_work: state diverged");
    work_last = work;
  }

  FiniteRateResult out;
  out.period = period;
  out.work = work_last;
  LineOptions line;
  line.nodes = std::max<std::size_t>(256, options.metric_nodes);
  line.check_convergence = false;
  out.geometric_work = line_integral_work(model, protocol, line).value;
  out.excess_work = out.work - out.geometric_work;
  out.predicted_dissipation = predicted_dissipated_work(model, protocol, period, options.metric_nodes);
  return out;
}

}  // namespace curvwork::cycles
