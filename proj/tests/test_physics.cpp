#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "poroadapt/biot.hpp"
#include "poroadapt/surfactant.hpp"
#include "poroadapt/twophase.hpp"

using namespace poroadapt;

namespace {

std::vector<bool> mask_of(const DirichletSet& bc, std::size_t n) {
  std::vector<bool> m(n, false);
  for (auto d : bc.dofs) m[d] = true;
  return m;
}

double rel_l2(const Vector& a, const Vector& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace

TEST_CASE("two-phase constitutive closed forms and derivatives") {
  const double g = 0.7, kappa = 1e-5;
  for (double theta : {0.1, 0.35, 0.6, 0.9}) {
    const auto c = twophase_constitutive(g, theta, kappa);
    const double s = std::pow(theta, g);
    const double lt = std::pow(s, g) + std::pow(1.0 - s, g);
    CHECK(c.s == doctest::Approx(s));
    CHECK(c.lambda_t == doctest::Approx(lt));
    CHECK(c.f_w == doctest::Approx(std::pow(s, g) / lt));
    CHECK(c.F == doctest::Approx(kappa * std::pow(s, g)));
    const double h = 1e-6;
    const auto p = twophase_constitutive(g, theta + h, kappa), m = twophase_constitutive(g, theta - h, kappa);
    CHECK(c.ds == doctest::Approx((p.s - m.s) / (2 * h)).epsilon(1e-6));
    CHECK(c.dfw == doctest::Approx((p.f_w - m.f_w) / (2 * h)).epsilon(1e-6));
    CHECK(c.dlambda == doctest::Approx((p.lambda_t - m.lambda_t) / (2 * h)).epsilon(1e-6));
    CHECK(c.dF == doctest::Approx((p.F - m.F) / (2 * h)).epsilon(1e-6));
  }
  const auto z = twophase_constitutive(g, 0.0, kappa);
  CHECK(z.s == 0.0);
  CHECK(z.ds == 0.0);
  CHECK(std::isfinite(z.dF));
  CHECK(std::isfinite(twophase_constitutive(g, 1.0, kappa).dF));
  CHECK_THROWS(twophase_constitutive(g, -0.1, kappa));
}

TEST_CASE("two-phase Newton matrix is the Jacobian of the residual") {
  TwoPhaseConfig cfg;
  cfg.mesh_n = 2;
  cfg.gamma = 0.7;
  TwoPhaseProblem p(cfg);
  const Vector x0 = p.initial_state();
  p.begin_time_step(x0, 0.1, 0.1);
  std::mt19937 rng(3);
  Vector x = oracles::random_vector(p.size(), rng, 0.3, 0.7);
  const Vector d = oracles::random_vector(p.size(), rng);
  const CsrMatrix j = p.matrix({SchemeId::TWOPHASE_NEWTON, 0.0}, x);
  auto r = [&](const Vector& v) { return p.residual(v); };
  const auto skip = mask_of(p.dirichlet(), p.size());
  const double e1 = oracles::fd_directional_error(r, j, x, d, 1e-5, skip);
  const double e2 = oracles::fd_directional_error(r, j, x, d, 1e-6, skip);
  CHECK(e1 < 1e-5);
  CHECK(e1 / e2 == doctest::Approx(10.0).epsilon(0.3));
}

TEST_CASE("surface tension and van Genuchten-Mualem values") {
  SurfactantConfig cfg;
  CHECK(surface_tension(0.0, cfg) == 1.0);
  CHECK(surface_tension(1.0, cfg) == doctest::Approx(1.0 / (1.0 - 0.0046 * std::log(1.0 / 0.44 + 1.0))));
  const auto sat = vgm(0.5, 1.0, cfg);
  CHECK(sat.theta == cfg.theta_s);
  CHECK(sat.K == cfg.K_s);
  CHECK(sat.dtheta_dpsi == 0.0);

  // gamma = 1 at c = 0: Se = (1 + (alpha |psi|)^n)^-m
  const double psi = -1.2, n = cfg.n_vg, m = 1.0 - 1.0 / n;
  const double se = std::pow(1.0 + std::pow(cfg.alpha_vg * 1.2, n), -m);
  const auto v = vgm(psi, 0.0, cfg);
  CHECK(v.theta == doctest::Approx(cfg.theta_r + (cfg.theta_s - cfg.theta_r) * se));
  CHECK(v.K == doctest::Approx(cfg.K_s * std::sqrt(se) * std::pow(1.0 - std::pow(1.0 - std::pow(se, 1.0 / m), m), 2)));

  const double h = 1e-6;
  for (double c : {0.0, 0.5, 3.0}) {
    for (double ps : {-0.3, -1.0, -2.5}) {
      const auto a = vgm(ps, c, cfg);
      CHECK(a.dtheta_dpsi ==
            doctest::Approx((vgm(ps + h, c, cfg).theta - vgm(ps - h, c, cfg).theta) / (2 * h)).epsilon(1e-5));
      const double hc = 1e-5;
      CHECK(a.dtheta_dc ==
            doctest::Approx((vgm(ps, c + hc, cfg).theta - vgm(ps, c - hc, cfg).theta) / (2 * hc)).epsilon(1e-5));
      // dK/dtheta along psi
      const auto ap = vgm(ps + h, c, cfg), am = vgm(ps - h, c, cfg);
      CHECK(a.dK == doctest::Approx((ap.K - am.K) / (ap.theta - am.theta)).epsilon(1e-4));
    }
  }
  CHECK_THROWS(surface_tension(-1.0, cfg));
}

TEST_CASE("surfactant Newton matrix is the Jacobian of the residual") {
  SurfactantConfig cfg;
  cfg.mesh_n = 2;
  SurfactantProblem p(cfg);
  p.begin_time_step(p.initial_state(), 0.1, 0.1);
  std::mt19937 rng(5);
  Vector x = oracles::random_vector(p.size(), rng);
  for (std::size_t i = 0; i < p.num_nodes(); ++i) {
    x[i] = -0.5 - std::abs(x[i]);
    x[p.num_nodes() + i] = 1.0 + std::abs(x[p.num_nodes() + i]);
  }
  const Vector d = oracles::random_vector(p.size(), rng);
  const CsrMatrix j = p.matrix({SchemeId::SURF_NEWTON, 0.0}, x);
  auto r = [&](const Vector& v) { return p.residual(v); };
  const auto skip = mask_of(p.dirichlet(), p.size());
  const double e1 = oracles::fd_directional_error(r, j, x, d, 1e-5, skip);
  const double e2 = oracles::fd_directional_error(r, j, x, d, 1e-6, skip);
  CHECK(e1 < 1e-5);
  CHECK(e1 / e2 == doctest::Approx(10.0).epsilon(0.3));
}

TEST_CASE("Lame parameters and stabilization family") {
  const Lame l = lame_from_E_nu(1e11, 0.2);
  CHECK(l.mu == doctest::Approx(1e11 / 2.4));
  CHECK(l.lambda == doctest::Approx(1e11 * 0.2 / (1.2 * 0.6)));
  CHECK(l.K_dr == doctest::Approx(l.mu + l.lambda));
  CHECK(l.mu == doctest::Approx(4.1667e10).epsilon(1e-4));
  CHECK(l.lambda == doctest::Approx(2.7778e10).epsilon(1e-4));
  CHECK(l.K_dr == doctest::Approx(6.9444e10).epsilon(1e-4));
  const auto f = stabilization_family(0.9, l);
  CHECK(f.L_min == doctest::Approx(3.645e-12).epsilon(1e-3));
  CHECK(f.L_phys == doctest::Approx(1.1664e-11).epsilon(1e-3));
  CHECK(f.L_MW == doctest::Approx(5.832e-12).epsilon(1e-3));
  CHECK(f.L_1D == doctest::Approx(7.29e-12).epsilon(1e-3));
  CHECK(f.by_name("L_opt", 0.2).value() == doctest::Approx(2.3 * f.L_min));
  CHECK(f.by_name("L_opt", 0.01).value() == doctest::Approx(2.5 * f.L_min));
  CHECK(f.by_name("L_opt", 0.4).value() == doctest::Approx(f.L_1D));
  CHECK_FALSE(f.by_name("L_bogus", 0.2).has_value());
  BiotConfig cfg;
  CHECK(fixed_stress_contraction(cfg) == doctest::Approx((0.9 / 1e-11) / (0.9 / 1e-11 + 2 * l.K_dr)));
}

TEST_CASE("traction pulse") {
  CHECK(biot_traction(0.25, 1e10) == doctest::Approx(1e10));
  CHECK(biot_traction(0.0, 1e10) == 0.0);
  CHECK(biot_traction(0.5, 1e10) == 0.0);
  CHECK(biot_traction(0.1, 1.0) == doctest::Approx(256 * 0.01 * 0.16));
}

TEST_CASE("Biot operators and a fixed-stress step against the coupled solve") {
  BiotConfig cfg;
  cfg.mesh_n = 8;
  BiotProblem p(cfg);
  const CsrMatrix& a = p.mechanics_matrix();
  const CsrMatrix at = a.transpose();
  for (std::size_t i = 0; i < a.nnz(); ++i) CHECK(a.values()[i] == doctest::Approx(at.values()[i]).scale(a.max_abs()));

  // no load at t = 0: everything stays at rest
  p.begin_time_step(p.initial_state(), 0.0, cfg.tau);
  CHECK(max_abs(p.monolithic_solve()) == 0.0);

  Vector state = p.initial_state();
  p.begin_time_step(state, cfg.tau, cfg.tau);
  const Vector mono = p.monolithic_solve();
  CHECK(max_abs(p.traction_load(cfg.tau)) > 0.0);
  Vector it = p.initial_iterate();
  const SchemeParams sp{SchemeId::BIOT_FIXED_STRESS, p.family().L_phys};
  for (int k = 0; k < 400; ++k) {
    const Vector next = p.step(sp, it).next;
    Vector d(next.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = next[i] - it[i];
    it = next;
    if (p.p_l2(d) <= 1e-10 * p.p_l2(it) && p.u_l2(d) <= 1e-10 * p.u_l2(it)) break;
  }
  CHECK(rel_l2(it, mono) < 1e-6);

  const Vector zero(p.size(), 0.0);
  const BiotEstimate e = p.eta(sp.L, it, it);
  CHECK(e.flow == 0.0);
  CHECK(e.mech == 0.0);
  CHECK(e.total == 0.0);
  CHECK(p.flow_norm(sp.L, zero) == 0.0);
  CHECK(p.mech_norm(zero) == 0.0);
}
