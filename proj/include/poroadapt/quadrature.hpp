#pragma once

#include <array>
#include <vector>

namespace poroadapt {

/// Rule on the reference triangle {(0,0),(1,0),(0,1)} in barycentric
/// coordinates. Weights sum to the reference area 1/2.
struct QuadRule {
  int degree = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// Symmetric rules exact up to `degree` (1, 2 or 4).
const QuadRule& triangle_rule(int degree);

/// Gauss-Legendre on [0,1]: points and weights (weights sum to 1).
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};

const LineRule& gauss_line_rule3();

}  // namespace poroadapt
