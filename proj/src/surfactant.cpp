#include "poroadapt/surfactant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace poroadapt {

void SurfactantConfig::validate() const {
  if (!(theta_r >= 0.0 && theta_r < theta_s)) throw std::invalid_argument("surfactant: need 0 <= theta_r < theta_s");
  if (!(n_vg > 1.0)) throw std::invalid_argument("surfactant: n_vg must exceed 1");
  for (double v : {D, a, b, K_s, alpha_vg, L1, L2, tau, T, C_tol, tau_min, eps_deg}) {
    if (!(v > 0.0)) throw std::invalid_argument("surfactant: parameters must be positive");
  }
  if (n_fast < 1 || mesh_n < 1) throw std::invalid_argument("surfactant: n_fast and mesh_n must be >= 1");
}

double surface_tension(double c, const SurfactantConfig& cfg) {
  if (!(c / cfg.a + 1.0 > 0.0)) throw std::domain_error("surfactant: concentration below -a");
  const double den = 1.0 - cfg.b * std::log(c / cfg.a + 1.0);
  if (!(den > 0.0)) throw std::domain_error("surfactant: surface tension denominator <= 0");
  return 1.0 / den;
}

VgmValues vgm(double psi, double c, const SurfactantConfig& cfg) {
  VgmValues v;
  if (psi > 0.0) {
    v.theta = cfg.theta_s;
    v.K = cfg.K_s;
    return v;
  }
  const double n = cfg.n_vg, m = (n - 1.0) / n, span = cfg.theta_s - cfg.theta_r;
  const double g = surface_tension(c, cfg);
  const double dg = g * g * cfg.b / (c + cfg.a);
  const double X = -cfg.alpha_vg * g * psi;
  const double Xn1 = std::pow(X, n - 1.0);
  const double P = 1.0 + Xn1 * X;
  const double Se = std::pow(P, -m);
  // dSe/dX = -(n-1) X^(n-1) P^(-m-1)
  const double dSe_dX = -(n - 1.0) * Xn1 * std::pow(P, -m - 1.0);
  v.theta = cfg.theta_r + span * Se;
  v.dtheta_dpsi = span * dSe_dX * (-cfg.alpha_vg * g);
  v.dtheta_dc = span * dSe_dX * (-cfg.alpha_vg * psi * dg);

  // with A = 1 - Se^(1/m) = X^n / P, A^m = X^(n-1) P^(-m)
  const double A = Xn1 * X / P;
  const double B = 1.0 - Xn1 * Se;
  v.K = std::min(cfg.K_s, cfg.K_s * std::sqrt(Se) * B * B);
  if (A >= cfg.eps_deg && Se > 0.0) {
    const double dK_dSe = cfg.K_s * (0.5 / std::sqrt(Se) * B * B +
                                     2.0 * std::sqrt(Se) * B * std::pow(A, m - 1.0) * std::pow(Se, 1.0 / m - 1.0));
    v.dK = dK_dSe / span;
  }
  return v;
}

SurfactantProblem::SurfactantProblem(const SurfactantConfig& cfg, std::shared_ptr<const TriMesh> mesh)
    : cfg_(cfg), mesh_(std::move(mesh)), tau_(cfg.tau) {
  cfg_.validate();
  if (!mesh_) mesh_ = std::make_shared<const TriMesh>(build_rect_mesh(cfg_.mesh_n, cfg_.mesh_n));
  space_ = std::make_unique<FeSpace>(mesh_, 1);
  c_space_ = std::make_unique<FeSpace>(mesh_, 1);
  space_->add_dirichlet({{BoundaryTag::Top}, 0, [](Point2, double) { return -2.0; }});
  c_space_->add_dirichlet({{BoundaryTag::Top}, 0, [](Point2 p, double) {
                             return p.x >= 0.25 - 1e-12 && p.x <= 0.75 + 1e-12 ? 4.0 : 1.0;
                           }});
  nn_ = space_->num_dofs();
  bc_ = space_->dirichlet_set(0.0, 0);
  bc_.merge(c_space_->dirichlet_set(0.0, nn_));
  BlockLayout single({space_.get()});
  mass_ = assemble(single, {{BilinearKind::Mass, 0, 0, {}, {}, {}}});
  prev_ = initial_state();
  flux_ = water_flux(prev_);
}

double SurfactantProblem::source(Point2 x) const {
  if (!gravity_ || x.y < 0.25) return 0.0;
  return 0.06 * std::cos(4.0 / 3.0 * std::numbers::pi * x.y) * std::sin(x.x);
}

Vector SurfactantProblem::initial_state() const {
  Vector v(2 * nn_, 1.0);
  const auto& xy = space_->dof_coords();
  for (std::size_t i = 0; i < nn_; ++i) v[i] = xy[i].y >= 0.25 ? -2.0 : -xy[i].y - 0.25;
  impose_dirichlet(v, bc_);
  return v;
}

std::vector<Vec2> SurfactantProblem::water_flux(const Vector& state) const {
  std::vector<Vec2> out(mesh_->num_triangles());
  for (std::size_t e = 0; e < out.size(); ++e) {
    const auto geo = element_geometry(*mesh_, e);
    const auto& tri = mesh_->triangles[e];
    double psi = 0.0, c = 0.0;
    Vec2 g;
    for (int a = 0; a < 3; ++a) {
      const auto i = static_cast<std::size_t>(tri[static_cast<std::size_t>(a)]);
      psi += state[i] / 3.0;
      c += state[nn_ + i] / 3.0;
      g += state[i] * geo.grad_lambda[static_cast<std::size_t>(a)];
    }
    out[e] = (-vgm(psi, c, cfg_).K) * drive(g);
  }
  return out;
}

void SurfactantProblem::begin_time_step(const Vector& prev, double, double tau) {
  if (prev.size() != size()) throw std::invalid_argument("surfactant: state size mismatch");
  prev_ = prev;
  tau_ = tau;
  flux_ = water_flux(prev_);
}

Vector SurfactantProblem::initial_iterate() const {
  Vector v = prev_;
  impose_dirichlet(v, bc_);
  return v;
}

CsrMatrix SurfactantProblem::matrix(const SchemeParams& params, const Vector& state) const {
  const std::span<const double> all(state);
  const std::vector<FieldSlot> slots{{space_.get(), all.subspan(0, nn_)}, {c_space_.get(), all.subspan(nn_, nn_)}};
  BlockLayout layout({space_.get(), c_space_.get()});
  const double tau = tau_, D = cfg_.D;
  auto vg = [this](const QpContext& q) { return vgm(q.value(0), q.value(1), cfg_); };
  auto tau_K = [tau, vg](const QpContext& q) { return tau * vg(q).K; };
  auto tau_D = [tau, D](const QpContext&) { return tau * D; };
  auto advect = [this, tau](const QpContext& q) { return -tau * flux_[q.element]; };

  std::vector<BilinearTerm> terms;
  if (params.scheme == SchemeId::SURF_L) {
    const double L1 = cfg_.L1, L2 = cfg_.L2;
    terms.push_back({BilinearKind::Mass, 0, 0, [L1](const QpContext&) { return L1; }, {}, {}});
    terms.push_back({BilinearKind::Stiffness, 0, 0, tau_K, {}, {}});
    terms.push_back({BilinearKind::Mass, 1, 1, [L2, vg](const QpContext& q) { return L2 + vg(q).theta; }, {}, {}});
  } else if (params.scheme == SchemeId::SURF_NEWTON) {
    terms.push_back({BilinearKind::Mass, 0, 0, [vg](const QpContext& q) { return vg(q).dtheta_dpsi; }, {}, {}});
    terms.push_back({BilinearKind::Stiffness, 0, 0, tau_K, {}, {}});
    terms.push_back({BilinearKind::TrialValueTestGrad, 0, 0, {}, {}, [this, tau, vg](const QpContext& q) {
                       const auto v = vg(q);
                       return (tau * v.dK * v.dtheta_dpsi) * drive(q.grad(0));
                     }});
    terms.push_back({BilinearKind::Mass, 0, 1, [vg](const QpContext& q) { return vg(q).dtheta_dc; }, {}, {}});
    terms.push_back({BilinearKind::TrialValueTestGrad, 0, 1, {}, {}, [this, tau, vg](const QpContext& q) {
                       const auto v = vg(q);
                       return (tau * v.dK * v.dtheta_dc) * drive(q.grad(0));
                     }});
    terms.push_back({BilinearKind::Mass, 1, 0, [vg](const QpContext& q) { return q.value(1) * vg(q).dtheta_dpsi; },
                     {}, {}});
    terms.push_back({BilinearKind::Mass, 1, 1, [vg](const QpContext& q) {
                       const auto v = vg(q);
                       return v.theta + q.value(1) * v.dtheta_dc;
                     }, {}, {}});
  } else {
    throw std::invalid_argument("surfactant: unsupported scheme");
  }
  terms.push_back({BilinearKind::Stiffness, 1, 1, tau_D, {}, {}});
  terms.push_back({BilinearKind::TrialValueTestGrad, 1, 1, {}, {}, advect});
  return assemble(layout, terms, slots);
}

Vector SurfactantProblem::residual(const Vector& state) const {
  const std::span<const double> all(state), old(prev_);
  const std::vector<FieldSlot> slots{{space_.get(), all.subspan(0, nn_)},
                                     {c_space_.get(), all.subspan(nn_, nn_)},
                                     {space_.get(), old.subspan(0, nn_)},
                                     {c_space_.get(), old.subspan(nn_, nn_)}};
  BlockLayout layout({space_.get(), c_space_.get()});
  const double tau = tau_, D = cfg_.D;
  std::vector<LinearTerm> terms;
  terms.push_back({LinearKind::Value, 0, [this, tau](const QpContext& q) {
                     return vgm(q.value(0), q.value(1), cfg_).theta - vgm(q.value(2), q.value(3), cfg_).theta -
                            tau * source(q.x);
                   }, {}});
  terms.push_back({LinearKind::Gradient, 0, {}, [this, tau](const QpContext& q) {
                     return (tau * vgm(q.value(0), q.value(1), cfg_).K) * drive(q.grad(0));
                   }});
  terms.push_back({LinearKind::Value, 1, [this](const QpContext& q) {
                     return vgm(q.value(0), q.value(1), cfg_).theta * q.value(1) -
                            vgm(q.value(2), q.value(3), cfg_).theta * q.value(3);
                   }, {}});
  terms.push_back({LinearKind::Gradient, 1, {}, [this, tau, D](const QpContext& q) {
                     return tau * (D * q.grad(1) - q.value(1) * flux_[q.element]);
                   }});
  return assemble_functional(layout, terms, slots);
}

IterativeProblem::StepResult SurfactantProblem::step(const SchemeParams& params, const Vector& iterate) {
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
  for (std::size_t i = nn_; i < 2 * nn_; ++i) out.next[i] = std::max(out.next[i], 0.0);
  return out;
}

double SurfactantProblem::increment_norm(const SchemeParams& params, const Vector& at, const Vector& delta) const {
  const std::span<const double> s(at), d(delta);
  const std::vector<FieldSlot> slots{{space_.get(), s.subspan(0, nn_)},
                                     {c_space_.get(), s.subspan(nn_, nn_)},
                                     {space_.get(), d.subspan(0, nn_)},
                                     {c_space_.get(), d.subspan(nn_, nn_)}};
  const double tau = tau_, D = cfg_.D;
  auto vg = [this](const QpContext& q) { return vgm(q.value(0), q.value(1), cfg_); };
  ScalarCoefficient w_psi, w_c;
  if (params.scheme == SchemeId::SURF_L) {
    const double L1 = cfg_.L1, L2 = cfg_.L2;
    w_psi = [L1](const QpContext&) { return L1; };
    w_c = [L2, vg](const QpContext& q) { return L2 + vg(q).theta; };
  } else {
    w_psi = [vg](const QpContext& q) { return vg(q).dtheta_dpsi; };
    w_c = [vg](const QpContext& q) {
      const auto v = vg(q);
      return std::max(v.theta + q.value(1) * v.dtheta_dc, 0.0);
    };
  }
  return weighted_norm(*mesh_,
                       {{w_psi, NormSelector::Value, 2},
                        {[tau, vg](const QpContext& q) { return tau * vg(q).K; }, NormSelector::Gradient, 2},
                        {w_c, NormSelector::Value, 3},
                        {[tau, D](const QpContext&) { return tau * D; }, NormSelector::Gradient, 3}},
                       slots);
}

double SurfactantProblem::eta_generic(const Vector& current, const Vector& previous, bool newton) const {
  const std::span<const double> cur(current), prv(previous);
  const std::vector<FieldSlot> slots{{space_.get(), cur.subspan(0, nn_)},
                                     {c_space_.get(), cur.subspan(nn_, nn_)},
                                     {space_.get(), prv.subspan(0, nn_)},
                                     {c_space_.get(), prv.subspan(nn_, nn_)}};
  const double tau = tau_, D = cfg_.D, eps = cfg_.eps_deg, L1 = cfg_.L1, L2 = cfg_.L2;
  const double sum = integrate(*mesh_, slots, [&](const QpContext& q) {
    const double c = q.value(1), c_old = q.value(3);
    const auto vk = vgm(q.value(0), c, cfg_);
    const auto vp = vgm(q.value(2), c_old, cfg_);
    const double dpsi = q.value(0) - q.value(2), dc = c - c_old;
    const double dtheta = vk.theta - vp.theta;
    const double lin = vp.dtheta_dpsi * dpsi + vp.dtheta_dc * dc;

    const double r_psi = newton ? lin - dtheta : L1 * dpsi - dtheta;
    const double r_c = newton ? c_old * lin - dtheta * c : L2 * dc - dtheta * c;
    // weighted by dtheta/dc, which is <= 0 for this model: the c term only
    // contributes where the weight is positive
    const double e_psi = vk.dtheta_dpsi >= eps ? r_psi * r_psi / vk.dtheta_dpsi : 0.0;
    const double e_c = vk.dtheta_dc >= eps ? r_c * r_c / vk.dtheta_dc : 0.0;

    const Vec2 dgrad = q.grad(1) - q.grad(3);
    // the transport operator is linear in c, so its contribution cancels
    // exactly; kept behind a flag for comparison
    double e_d = 0.0;
    if (cfg_.eta_transport) e_d = (D * dgrad - dc * flux_[q.element]).norm2() / D;

    Vec2 k_term = (vk.K - vp.K) * drive(q.grad(0));
    if (newton) k_term -= (vp.dK * lin) * drive(q.grad(2));
    const double e_k = vk.K >= eps ? k_term.norm2() / vk.K : 0.0;
    return e_psi + e_c + tau * e_d + tau * e_k;
  });
  return std::sqrt(std::max(sum, 0.0));
}

double SurfactantProblem::eta_L_to_N(const Vector& current, const Vector& previous) const {
  return eta_generic(current, previous, false);
}

double SurfactantProblem::eta_N_to_N(const Vector& current, const Vector& previous) const {
  return eta_generic(current, previous, true);
}

std::vector<EstimateValue> SurfactantProblem::estimate(const SchemeParams& params, const Vector& current,
                                                       const Vector& previous) const {
  if (params.scheme == SchemeId::SURF_L) {
    return {{"eta_3to4", SchemeId::SURF_NEWTON, eta_L_to_N(current, previous), 0.0}};
  }
  return {{"eta_4to4", SchemeId::SURF_NEWTON, eta_N_to_N(current, previous), 0.0}};
}

std::vector<double> SurfactantProblem::field_norms(const Vector& v) const {
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

double SurfactantProblem::residual_norm(const Vector& state) const {
  Vector r = residual(state);
  zero_dirichlet(r, bc_);
  return norm2(r);
}

}  // namespace poroadapt
