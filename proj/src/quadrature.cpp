#include "poroadapt/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace poroadapt {

namespace {

QuadRule make_degree1() {
  QuadRule r;
  r.degree = 1;
  r.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  r.weights = {0.5};
  return r;
}

QuadRule make_degree2() {
  QuadRule r;
  r.degree = 2;
  const double a = 2.0 / 3.0, b = 1.0 / 6.0;
  r.points = {{a, b, b}, {b, a, b}, {b, b, a}};
  r.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
  return r;
}

// Dunavant, six points.
QuadRule make_degree4() {
  QuadRule r;
  r.degree = 4;
  const double a1 = 0.445948490915964886318329253883;
  const double b1 = 1.0 - 2.0 * a1;
  const double w1 = 0.223381589678011465944827207347 / 2.0;
  const double a2 = 0.091576213509770743459571463402;
  const double b2 = 1.0 - 2.0 * a2;
  const double w2 = 0.109951743655321867388506125986 / 2.0;
  r.points = {{b1, a1, a1}, {a1, b1, a1}, {a1, a1, b1}, {b2, a2, a2}, {a2, b2, a2}, {a2, a2, b2}};
  r.weights = {w1, w1, w1, w2, w2, w2};
  return r;
}

}  // namespace

const QuadRule& triangle_rule(int degree) {
  static const QuadRule r1 = make_degree1();
  static const QuadRule r2 = make_degree2();
  static const QuadRule r4 = make_degree4();
  switch (degree) {
    case 1: return r1;
    case 2: return r2;
    case 4: return r4;
    default: throw std::invalid_argument("triangle_rule: no rule of degree " + std::to_string(degree));
  }
}

const LineRule& gauss_line_rule3() {
  static const LineRule rule = [] {
    const double d = std::sqrt(3.0 / 5.0) / 2.0;
    return LineRule{{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  }();
  return rule;
}

}  // namespace poroadapt
