#include "curvwork/quadrature.hpp"

#include "curvwork/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace curvwork::quadrature {
namespace {

Rule compute_gauss_legendre(std::size_t n) {
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pi = std::numbers::pi;
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace

const Rule& gauss_legendre(std::size_t n) {
  if (n < 2) throw ValidationError("gauss_legendre: need at least two nodes");
  static std::mutex mutex;
  static std::map<std::size_t, Rule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

AngularTable mirrored_angles(std::size_t n) {
  if (n < 4 || n % 2 != 0) throw ValidationError("mirrored_angles: n must be even and >= 4");
  AngularTable t;
  t.cos.assign(n, 0.0);
  t.sin.assign(n, 0.0);
  t.cos[0] = 1.0;
  t.cos[n / 2] = -1.0;
  for (std::size_t k = 1; k < n / 2; ++k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    t.cos[k] = std::cos(theta);
    t.sin[k] = std::sin(theta);
    t.cos[n - k] = t.cos[k];
    t.sin[n - k] = -t.sin[k];
  }
  return t;
}

double mirrored_sum(const std::vector<double>& values) {
  const std::size_t n = values.size();
  double total = values[0] + values[n / 2];
  for (std::size_t k = 1; k < n / 2; ++k) total += values[k] + values[n - k];
  return total;
}

}  // namespace curvwork::quadrature
