#pragma once

#include <cstddef>
#include <vector>

namespace curvwork::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton on P_n, cached).
const Rule& gauss_legendre(std::size_t n);

/// Angular table for the periodic trapezoid: cos/sin of 2 pi k / n with
/// exact mirror symmetry sin(2pi - t) = -sin(t), cos(2pi - t) = cos(t).
struct AngularTable {
  std::vector<double> cos;
  std::vector<double> sin;
};
AngularTable mirrored_angles(std::size_t n);

/// Sum of f_k over a mirrored periodic table, accumulated in pairs (k, n-k)
/// so that odd integrands cancel exactly.
double mirrored_sum(const std::vector<double>& values);

}  // namespace curvwork::quadrature
