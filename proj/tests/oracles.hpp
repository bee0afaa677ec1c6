#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "poroadapt/sparse.hpp"

namespace oracles {

using poroadapt::Vector;

/// || J d - (R(x + eps d) - R(x)) / eps ||_inf over the rows not in `skip`.
template <class Residual>
double fd_directional_error(const Residual& residual, const poroadapt::CsrMatrix& jac, const Vector& x,
                            const Vector& d, double eps, const std::vector<bool>& skip) {
  const Vector r0 = residual(x);
  Vector xe = x;
  for (std::size_t i = 0; i < x.size(); ++i) xe[i] += eps * d[i];
  const Vector r1 = residual(xe);
  const Vector jd = jac.multiply(d);
  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!skip.empty() && skip[i]) continue;
    err = std::max(err, std::abs(jd[i] - (r1[i] - r0[i]) / eps));
  }
  return err;
}

inline Vector random_vector(std::size_t n, std::mt19937& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace oracles
