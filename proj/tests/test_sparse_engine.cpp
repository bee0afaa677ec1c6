#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "poroadapt/engine.hpp"
#include "poroadapt/sparse.hpp"

using namespace poroadapt;

namespace {

// Dense Gaussian elimination with partial pivoting.
Vector dense_solve(std::vector<std::vector<double>> a, Vector b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
    std::swap(a[k], a[p]);
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

CsrMatrix random_banded(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t d = i > j ? i - j : j - i;
      if (d == 0) t.push_back({i, j, 0.1 * u(rng)});  // weak diagonal forces pivoting
      else if (d <= 3 || (i * 7 + j * 3) % 11 == 0) t.push_back({i, j, u(rng)});
    }
  }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

}  // namespace

TEST_CASE("triplets are summed in insertion order") {
  const CsrMatrix a = CsrMatrix::from_triplets(2, 3, {{0, 2, 1.0}, {1, 0, 2.0}, {0, 2, 0.5}, {0, 0, -1.0}});
  CHECK(a.nnz() == 3);
  CHECK(a.at(0, 2) == 1.5);
  CHECK(a.at(0, 0) == -1.0);
  CHECK(a.at(1, 1) == 0.0);
  const Vector y = a.multiply(std::vector<double>{1.0, 2.0, 3.0});
  CHECK(y[0] == doctest::Approx(3.5));
  CHECK(y[1] == doctest::Approx(2.0));
  CHECK(a.transpose().at(2, 0) == 1.5);
}

TEST_CASE("RCM ordering is a permutation") {
  std::mt19937 rng(7);
  const CsrMatrix a = random_banded(30, rng);
  auto p = reverse_cuthill_mckee(a);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == i);
}

TEST_CASE("banded LU agrees with dense elimination") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n : {5u, 17u, 40u}) {
    const CsrMatrix a = random_banded(n, rng);
    Vector b(n);
    for (auto& v : b) v = u(rng);
    const LuFactor f = factor(a);
    const Vector x = solve(f, b);
    const Vector ref = dense_solve(a.to_dense(), b);
    for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-9));
    const Vector r = a.multiply(x);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(r[i] - b[i]) < 1e-10);
  }
}

TEST_CASE("singular matrices are reported") {
  const CsrMatrix a = CsrMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {0, 1, 2.0}});
  CHECK_THROWS_AS(factor(a), SingularMatrixError);
}

TEST_CASE("matrix market output") {
  std::ostringstream os;
  write_matrix_market(os, CsrMatrix::identity(2));
  CHECK(os.str().find("%%MatrixMarket matrix coordinate real general") == 0);
}

TEST_CASE("stopping rule and effectivity index") {
  const StoppingRule abs_rule{{{"a", 1e-6, false}, {"b", 1e-6, false}}, 10};
  CHECK(check_stopping({1e-7, 1e-6}, {1.0, 1.0}, abs_rule));
  CHECK_FALSE(check_stopping({1e-7, 2e-6}, {1.0, 1.0}, abs_rule));
  const StoppingRule rel{{{"p", 1e-6, true}}, 10};
  CHECK(check_stopping({1e-3}, {1e4}, rel));
  CHECK_FALSE(check_stopping({1e-1}, {1e4}, rel));
  CHECK_FALSE(check_stopping({NAN}, {1.0}, rel));
  CHECK_THROWS(check_stopping({1.0}, {1.0}, abs_rule));
  CHECK(effectivity_index(3.0, 2.0) == 1.5);
  CHECK_THROWS(effectivity_index(1.0, 0.0));
}

namespace {

IterationRecord record_with(const std::string& name, SchemeId target, double value, double reference,
                            std::optional<double> eff = std::nullopt) {
  IterationRecord r;
  r.estimates.push_back({name, target, value, reference});
  r.eff_index = eff;
  return r;
}

}  // namespace

TEST_CASE("switching controller") {
  SwitchingController c({SchemeId::TWOPHASE_L, 2.0}, SchemeId::TWOPHASE_NEWTON, "eta_1to2", "eta_2to2", 1.0);
  SchemeParams p = c.begin_step();
  CHECK(p.scheme == SchemeId::TWOPHASE_L);
  auto d = c.decide(record_with("eta_1to2", SchemeId::TWOPHASE_NEWTON, 2.0, 1.0), p);
  CHECK(d.action == Action::NONE);
  d = c.decide(record_with("eta_1to2", SchemeId::TWOPHASE_NEWTON, 1.0, 1.0), p);
  CHECK(d.action == Action::SWITCH_TO);
  CHECK(d.next.scheme == SchemeId::TWOPHASE_NEWTON);
  // the Newton choice carries over to the next time step
  CHECK(c.begin_step().scheme == SchemeId::TWOPHASE_NEWTON);
  d = c.decide(record_with("eta_2to2", SchemeId::TWOPHASE_NEWTON, 1.5, 1.0), d.next);
  CHECK(d.action == Action::SWITCH_TO);
  CHECK(d.next.scheme == SchemeId::TWOPHASE_L);
  CHECK(d.next.L == 2.0);
}

TEST_CASE("adaptive L controller") {
  AdaptiveLController c({SchemeId::TWOPHASE_L, 1.0}, "eta_1to1");
  const SchemeParams p = c.begin_step();
  auto d = c.decide(record_with("eta_1to1", SchemeId::TWOPHASE_L, 0.9, 1.0), p);
  CHECK(d.action == Action::L_DOWN);
  CHECK(d.next.L == doctest::Approx(0.8));
  d = c.decide(record_with("eta_1to1", SchemeId::TWOPHASE_L, 1.2, 1.0), d.next);
  CHECK(d.action == Action::L_UP);
  CHECK(d.next.L == doctest::Approx(0.8 * std::sqrt(2.0)));
  d = c.decide(record_with("eta_1to1", SchemeId::TWOPHASE_L, 0.5, 1.0), d.next);
  CHECK(d.action == Action::NONE);
}

TEST_CASE("adaptive fixed-stress controller") {
  const double l_min = 1.0, l_phys = 3.0;
  AdaptiveFixedStressController c({SchemeId::BIOT_FIXED_STRESS, l_min}, "eta_5to5", l_min, l_phys, 1.4);
  SchemeParams p = c.begin_step();
  auto d = c.decide(record_with("eta_5to5", SchemeId::BIOT_FIXED_STRESS, 15.0, 1.0, 50.0), p);
  CHECK(d.action == Action::L_UP);
  CHECK(d.next.L == doctest::Approx(1.4));
  CHECK(c.has_increased());
  auto none = c.decide(record_with("eta_5to5", SchemeId::BIOT_FIXED_STRESS, 15.0, 1.0, 500.0), d.next);
  CHECK(none.action == Action::NONE);
  none = c.decide(record_with("eta_5to5", SchemeId::BIOT_FIXED_STRESS, 15.0, 1.0), d.next);
  CHECK(none.action == Action::NONE);
  d = c.decide(record_with("eta_5to5", SchemeId::BIOT_FIXED_STRESS, 15.0, 1.0, 50.0), d.next);
  d = c.decide(record_with("eta_5to5", SchemeId::BIOT_FIXED_STRESS, 15.0, 1.0, 50.0), d.next);
  d = c.decide(record_with("eta_5to5", SchemeId::BIOT_FIXED_STRESS, 15.0, 1.0, 50.0), d.next);
  CHECK(d.next.L == doctest::Approx(l_phys));
  // next step starts in decrease mode
  p = c.begin_step();
  d = c.decide(record_with("eta_5to5", SchemeId::BIOT_FIXED_STRESS, 15.0, 1.0, 50.0), p);
  CHECK(d.action == Action::L_DOWN);
  CHECK(d.next.L == doctest::Approx(0.9 * l_phys));
  CHECK_FALSE(c.has_increased());
}

TEST_CASE("time step controller") {
  TimeStepController c({SchemeId::SURF_NEWTON, 0.0}, "eta_4to4");
  const SchemeParams p = c.begin_step();
  CHECK(c.decide(record_with("eta_4to4", SchemeId::SURF_NEWTON, 1.5, 0.1), p).action == Action::TAU_HALVE);
  CHECK(c.decide(record_with("eta_4to4", SchemeId::SURF_NEWTON, 0.9, 0.1), p).action == Action::NONE);
}

namespace {

// x' = -x per step: (1 + tau) x^n = x^{n-1}, solved by the damped update
// x <- x - w (r(x)) with a scheme-dependent damping.
class ScalarProblem : public IterativeProblem {
 public:
  std::size_t size() const override { return 1; }
  Vector initial_state() const override { return {1.0}; }
  void begin_time_step(const Vector& prev, double, double tau) override {
    prev_ = prev[0];
    tau_ = tau;
  }
  Vector initial_iterate() const override { return {prev_}; }
  StepResult step(const SchemeParams& p, const Vector& x) override {
    const double r = (1.0 + tau_) * x[0] - prev_;
    const double w = p.scheme == SchemeId::TWOPHASE_NEWTON ? 1.0 / (1.0 + tau_) : 1.0 / (1.0 + tau_ + p.L);
    return {{x[0] - w * r}, 0.0};
  }
  double increment_norm(const SchemeParams&, const Vector&, const Vector& d) const override { return std::abs(d[0]); }
  std::vector<EstimateValue> estimate(const SchemeParams&, const Vector& c, const Vector& p) const override {
    return {{"eta_1to1", SchemeId::TWOPHASE_L, std::abs(c[0] - p[0]), 0.0}};
  }
  std::vector<double> field_norms(const Vector& v) const override { return {std::abs(v[0])}; }
  double residual_norm(const Vector& x) const override { return std::abs((1.0 + tau_) * x[0] - prev_); }

 private:
  double prev_ = 1.0;
  double tau_ = 0.1;
};

}  // namespace

TEST_CASE("time marching on a scalar problem") {
  ScalarProblem p;
  FixedController newton({SchemeId::TWOPHASE_NEWTON, 0.0});
  const StoppingRule rule{{{"x", 1e-12, false}}, 50};
  TimeStepping ts;
  ts.tau = 0.25;
  ts.T = 1.0;
  const RunResult r = run(p, newton, rule, ts, true);
  CHECK(r.status == RunStatus::Converged);
  CHECK(r.accepted_steps == 4);
  CHECK(r.solutions.back()[0] == doctest::Approx(std::pow(1.0 / 1.25, 4)));
  // exact solve then a zero increment
  CHECK(r.records.size() == 8);
  CHECK(r.records.back().action == Action::STOP_CONVERGED);

  FixedController lscheme({SchemeId::TWOPHASE_L, 1.0});
  const RunResult rl = run(p, lscheme, rule, ts);
  CHECK(rl.status == RunStatus::Converged);
  CHECK(rl.records.size() > r.records.size());
  // eff index compares the previous estimate with the new increment
  for (const auto& rec : rl.records)
    if (rec.eff_index && rec.k > 1 && rec.eta_inc > 1e-14) CHECK(*rec.eff_index > 1.0);

  const StoppingRule tight{{{"x", 1e-30, false}}, 3};
  const RunResult rd = run(p, lscheme, tight, ts);
  CHECK(rd.status == RunStatus::Diverged);
  CHECK(rd.records.back().action == Action::STOP_DIVERGED);
}

TEST_CASE("action and scheme names") {
  CHECK(to_string(Action::TAU_DOUBLE) == "TAU_DOUBLE");
  CHECK(to_string(SchemeId::BIOT_FIXED_STRESS) == "BIOT_FIXED_STRESS");
}
