#include "poroadapt/twophase.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poroadapt {

void TwoPhaseConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("twophase: gamma must lie in (0,1]");
  if (!(kappa > 0.0)) throw std::invalid_argument("twophase: kappa must be positive");
  if (!(L > 0.0)) throw std::invalid_argument("twophase: L must be positive");
  if (!(tau > 0.0) || !(T > 0.0)) throw std::invalid_argument("twophase: tau and T must be positive");
  if (!(C_tol >= 1.0)) throw std::invalid_argument("twophase: C_tol must be >= 1");
  if (!(eps_deg > 0.0)) throw std::invalid_argument("twophase: eps_deg must be positive");
  if (mesh_n < 1) throw std::invalid_argument("twophase: mesh_n must be >= 1");
}

TwoPhaseCoefficients twophase_constitutive(double g, double theta, double kappa, double eps) {
  if (!(theta >= 0.0)) throw std::domain_error("twophase: negative Theta");
  TwoPhaseCoefficients c;
  c.s = theta > 0.0 ? std::pow(theta, g) : 0.0;
  if (c.s > 1.0 + 1e-12) throw std::domain_error("twophase: saturation above 1");
  c.s = std::min(c.s, 1.0);
  c.ds = theta >= eps ? g * std::pow(theta, g - 1.0) : 0.0;
  const double s = c.s, m = 1.0 - s;
  const double sg = s > 0.0 ? std::pow(s, g) : 0.0;
  const double mg = m > 0.0 ? std::pow(m, g) : 0.0;
  // s^(g-1) and (1-s)^(g-1) blow up at the ends for g < 1; masked there
  const double s_pow = s >= eps ? std::pow(s, g - 1.0) : 0.0;
  const double m_pow = m >= eps ? std::pow(m, g - 1.0) : 0.0;
  c.lambda_t = sg + mg;
  c.dlambda_t = g * (s_pow - m_pow);
  c.f_w = sg / c.lambda_t;
  const double dfw_ds = (g * s_pow * c.lambda_t - sg * c.dlambda_t) / (c.lambda_t * c.lambda_t);
  c.dfw = dfw_ds * c.ds;
  c.dlambda = c.dlambda_t * c.ds;
  c.F = kappa * c.f_w * c.lambda_t;
  c.dF = kappa * (c.dfw * c.lambda_t + c.f_w * c.dlambda);
  return c;
}

TwoPhaseProblem::TwoPhaseProblem(const TwoPhaseConfig& cfg, std::shared_ptr<const TriMesh> mesh)
    : cfg_(cfg), mesh_(std::move(mesh)), tau_(cfg.tau) {
  cfg_.validate();
  if (!mesh_) mesh_ = std::make_shared<const TriMesh>(build_rect_mesh(cfg_.mesh_n, cfg_.mesh_n));
  theta_space_ = std::make_unique<FeSpace>(mesh_, 1);
  p_space_ = std::make_unique<FeSpace>(mesh_, 1);
  p_space_->add_dirichlet({{BoundaryTag::Bottom}, 0, [](Point2, double) { return 1.0; }});
  p_space_->add_dirichlet({{BoundaryTag::Top}, 0, [](Point2, double) { return 0.0; }});
  nn_ = theta_space_->num_dofs();
  bc_ = p_space_->dirichlet_set(0.0, nn_);
  BlockLayout single({theta_space_.get()});
  mass_ = assemble(single, {{BilinearKind::Mass, 0, 0, {}, {}, {}}});
  prev_ = initial_state();
}

TwoPhaseCoefficients TwoPhaseProblem::coeff(double theta) const {
  return twophase_constitutive(cfg_.gamma, theta, cfg_.kappa, cfg_.eps_deg);
}

Vector TwoPhaseProblem::initial_state() const {
  Vector v(2 * nn_, 0.0);
  const auto& xy = theta_space_->dof_coords();
  // nodal values: the bottom layer of cells carries 0.6, the circle overrides
  double h_bottom = 1e300;
  for (const auto& p : xy)
    if (p.y > 1e-12) h_bottom = std::min(h_bottom, p.y);
  for (std::size_t i = 0; i < nn_; ++i) {
    const Point2 p = xy[i];
    double s = 0.2;
    if (p.y <= h_bottom * (1.0 + 1e-9)) s = 0.6;
    const double r2 = (p.x - 0.5) * (p.x - 0.5) + (p.y - 0.5) * (p.y - 0.5);
    if (r2 <= 0.1) s = circle_s_;
    v[i] = s > 0.0 ? std::pow(s, 1.0 / cfg_.gamma) : 0.0;
    v[nn_ + i] = 1.0 - p.y;
  }
  impose_dirichlet(v, bc_);
  return v;
}

void TwoPhaseProblem::begin_time_step(const Vector& prev, double, double tau) {
  if (prev.size() != size()) throw std::invalid_argument("twophase: state size mismatch");
  prev_ = prev;
  tau_ = tau;
}

Vector TwoPhaseProblem::initial_iterate() const {
  Vector v = prev_;
  impose_dirichlet(v, bc_);
  return v;
}

CsrMatrix TwoPhaseProblem::matrix(const SchemeParams& params, const Vector& state) const {
  const std::span<const double> all(state);
  const std::vector<FieldSlot> slots{{theta_space_.get(), all.subspan(0, nn_)}, {p_space_.get(), all.subspan(nn_, nn_)}};
  BlockLayout layout({theta_space_.get(), p_space_.get()});
  const double tau = tau_, kappa = cfg_.kappa;
  std::vector<BilinearTerm> terms;
  auto tau_F = [this, tau](const QpContext& c) { return tau * coeff(c.value(0)).F; };
  auto tau_kl = [this, tau, kappa](const QpContext& c) { return tau * kappa * coeff(c.value(0)).lambda_t; };
  auto tau_const = [tau](const QpContext&) { return tau; };
  if (params.scheme == SchemeId::TWOPHASE_L) {
    const double L = params.L;
    terms.push_back({BilinearKind::Mass, 0, 0, [L](const QpContext&) { return L; }, {}, {}});
    terms.push_back({BilinearKind::Stiffness, 0, 0, tau_const, {}, {}});
    terms.push_back({BilinearKind::Stiffness, 0, 1, tau_F, {}, {}});
    terms.push_back({BilinearKind::Stiffness, 1, 1, tau_kl, {}, {}});
  } else if (params.scheme == SchemeId::TWOPHASE_NEWTON) {
    terms.push_back({BilinearKind::Mass, 0, 0, [this](const QpContext& c) { return coeff(c.value(0)).ds; }, {}, {}});
    terms.push_back({BilinearKind::Stiffness, 0, 0, tau_const, {}, {}});
    terms.push_back({BilinearKind::TrialValueTestGrad, 0, 0, {}, {}, [this, tau](const QpContext& c) {
                       return (tau * coeff(c.value(0)).dF) * c.grad(1);
                     }});
    terms.push_back({BilinearKind::Stiffness, 0, 1, tau_F, {}, {}});
    terms.push_back({BilinearKind::TrialValueTestGrad, 1, 0, {}, {}, [this, tau, kappa](const QpContext& c) {
                       return (tau * kappa * coeff(c.value(0)).dlambda) * c.grad(1);
                     }});
    terms.push_back({BilinearKind::Stiffness, 1, 1, tau_kl, {}, {}});
  } else {
    throw std::invalid_argument("twophase: unsupported scheme");
  }
  return assemble(layout, terms, slots);
}

Vector TwoPhaseProblem::residual(const Vector& state) const {
  const std::span<const double> all(state);
  const std::span<const double> old(prev_);
  const std::vector<FieldSlot> slots{{theta_space_.get(), all.subspan(0, nn_)},
                                     {p_space_.get(), all.subspan(nn_, nn_)},
                                     {theta_space_.get(), old.subspan(0, nn_)}};
  BlockLayout layout({theta_space_.get(), p_space_.get()});
  const double tau = tau_, kappa = cfg_.kappa;
  std::vector<LinearTerm> terms;
  terms.push_back({LinearKind::Value, 0, [this](const QpContext& c) {
                     return coeff(c.value(0)).s - coeff(c.value(2)).s;
                   }, {}});
  terms.push_back({LinearKind::Gradient, 0, {}, [this, tau](const QpContext& c) {
                     return tau * c.grad(0) + (tau * coeff(c.value(0)).F) * c.grad(1);
                   }});
  terms.push_back({LinearKind::Gradient, 1, {}, [this, tau, kappa](const QpContext& c) {
                     return (tau * kappa * coeff(c.value(0)).lambda_t) * c.grad(1);
                   }});
  return assemble_functional(layout, terms, slots);
}

IterativeProblem::StepResult TwoPhaseProblem::step(const SchemeParams& params, const Vector& iterate) {
  CsrMatrix a = matrix(params, iterate);
  Vector rhs = residual(iterate);
  for (double& v : rhs) v = -v;
  DirichletSet hom = bc_;
  std::fill(hom.values.begin(), hom.values.end(), 0.0);
  apply_dirichlet(a, rhs, hom);
  const Vector delta = solve(factor(a), rhs);

  StepResult out;
  const Vector ad = a.multiply(delta);
  double bdd = 0.0, rd = 0.0;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    bdd += delta[i] * ad[i];
    rd += delta[i] * rhs[i];
  }
  out.linear_defect = std::abs(bdd - rd) / std::max(std::abs(bdd), 1e-300);
  out.next = iterate;
  for (std::size_t i = 0; i < delta.size(); ++i) out.next[i] += delta[i];
  for (std::size_t i = 0; i < nn_; ++i) out.next[i] = std::clamp(out.next[i], 0.0, 1.0);
  return out;
}

double TwoPhaseProblem::increment_norm(const SchemeParams& params, const Vector& at, const Vector& delta) const {
  const std::span<const double> a(at), d(delta);
  const std::vector<FieldSlot> slots{{theta_space_.get(), a.subspan(0, nn_)},
                                     {theta_space_.get(), d.subspan(0, nn_)},
                                     {p_space_.get(), d.subspan(nn_, nn_)}};
  const double tau = tau_, kappa = cfg_.kappa;
  ScalarCoefficient mass_weight;
  if (params.scheme == SchemeId::TWOPHASE_L) {
    const double L = params.L;
    mass_weight = [L](const QpContext&) { return L; };
  } else {
    mass_weight = [this](const QpContext& c) { return coeff(c.value(0)).ds; };
  }
  return weighted_norm(*mesh_,
                       {{mass_weight, NormSelector::Value, 1},
                        {[tau](const QpContext&) { return tau; }, NormSelector::Gradient, 1},
                        {[this, tau, kappa](const QpContext& c) { return tau * kappa * coeff(c.value(0)).lambda_t; },
                         NormSelector::Gradient, 2}},
                       slots);
}

// kind 0: L-scheme to Newton, 1: Newton to Newton, 2: L-scheme to L-scheme
double TwoPhaseProblem::eta_generic(const Vector& current, const Vector& previous, int kind, double L) const {
  const std::span<const double> cur(current), prv(previous);
  const std::vector<FieldSlot> slots{{theta_space_.get(), cur.subspan(0, nn_)},
                                     {p_space_.get(), cur.subspan(nn_, nn_)},
                                     {theta_space_.get(), prv.subspan(0, nn_)},
                                     {p_space_.get(), prv.subspan(nn_, nn_)}};
  const double tau = tau_, kappa = cfg_.kappa, eps = cfg_.eps_deg;
  const double sum = integrate(*mesh_, slots, [&](const QpContext& c) {
    const auto ck = coeff(c.value(0));
    const auto cp = coeff(c.value(2));
    const double dth = c.value(0) - c.value(2);
    const double dsat = ck.s - cp.s;
    const Vec2 gp = c.grad(1), gp_old = c.grad(3);

    const double lin = kind == 1 ? cp.ds * dth : L * dth;
    double w_s = 0.0;
    if (kind == 2) w_s = 1.0 / L;
    else if (ck.ds >= eps) w_s = 1.0 / ck.ds;
    const double eta_s = w_s * (lin - dsat) * (lin - dsat);

    Vec2 flux = (ck.F - cp.F) * gp;
    if (kind == 1) flux -= (cp.dF * dth) * gp_old;

    const double kl = kappa * ck.lambda_t, kl_old = kappa * cp.lambda_t;
    Vec2 mob = (kl - kl_old) * gp;
    if (kind == 1) mob -= (kappa * cp.dlambda * dth) * gp_old;
    const double w_l = kl >= eps ? 1.0 / kl : 0.0;

    return eta_s + tau * flux.norm2() + tau * w_l * mob.norm2();
  });
  return std::sqrt(std::max(sum, 0.0));
}

double TwoPhaseProblem::eta_L_to_N(const Vector& current, const Vector& previous, double L) const {
  return eta_generic(current, previous, 0, L);
}

double TwoPhaseProblem::eta_N_to_N(const Vector& current, const Vector& previous) const {
  return eta_generic(current, previous, 1, 0.0);
}

double TwoPhaseProblem::eta_L_to_L(const Vector& current, const Vector& previous, double L) const {
  return eta_generic(current, previous, 2, L);
}

std::vector<EstimateValue> TwoPhaseProblem::estimate(const SchemeParams& params, const Vector& current,
                                                     const Vector& previous) const {
  if (params.scheme == SchemeId::TWOPHASE_L) {
    return {{"eta_1to2", SchemeId::TWOPHASE_NEWTON, eta_L_to_N(current, previous, params.L), 0.0},
            {"eta_1to1", SchemeId::TWOPHASE_L, eta_L_to_L(current, previous, params.L), 0.0}};
  }
  return {{"eta_2to2", SchemeId::TWOPHASE_NEWTON, eta_N_to_N(current, previous), 0.0}};
}

std::vector<double> TwoPhaseProblem::field_norms(const Vector& v) const {
  const std::span<const double> all(v);
  std::vector<double> out;
  for (std::size_t b = 0; b < 2; ++b) {
    const auto part = all.subspan(b * nn_, nn_);
    const Vector mv = mass_.multiply(part);
    double s = 0.0;
    for (std::size_t i = 0; i < nn_; ++i) s += part[i] * mv[i];
    out.push_back(std::sqrt(std::max(s, 0.0)));
  }
  return out;
}

double TwoPhaseProblem::residual_norm(const Vector& state) const {
  Vector r = residual(state);
  zero_dirichlet(r, bc_);
  return norm2(r);
}

}  // namespace poroadapt
