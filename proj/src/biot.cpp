#include "poroadapt/biot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poroadapt {

void BiotConfig::validate() const {
  if (!(nu > 0.0 && nu < 0.5)) throw std::invalid_argument("biot: nu must lie in (0, 0.5)");
  if (!(E > 0.0) || !(alpha > 0.0) || !(c0 > 0.0) || !(kappa > 0.0) || !(mu_f > 0.0))
    throw std::invalid_argument("biot: material parameters must be positive");
  if (!(tau > 0.0) || !(T > 0.0)) throw std::invalid_argument("biot: tau and T must be positive");
  if (!(L >= 0.0)) throw std::invalid_argument("biot: L must be positive (0 selects L_min)");
  if (!(C_inc >= 1.0)) throw std::invalid_argument("biot: C_inc must be >= 1");
  if (!(h_max >= 0.0)) throw std::invalid_argument("biot: h_max must be non-negative");
  if (!(tol > 0.0)) throw std::invalid_argument("biot: tol must be positive");
  if (mesh_n < 2 || mesh_n % 2 != 0) throw std::invalid_argument("biot: mesh_n must be even and >= 2");
}

Lame lame_from_E_nu(double E, double nu) {
  if (!(nu < 0.5)) throw std::invalid_argument("lame_from_E_nu: nu must be below 0.5");
  Lame l;
  l.mu = E / (2.0 * (1.0 + nu));
  l.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  l.K_dr = l.mu + l.lambda;
  return l;
}

StabilizationFamily stabilization_family(double alpha, const Lame& lame) {
  const double a2 = alpha * alpha;
  StabilizationFamily f;
  f.L_min = a2 / (4.0 * lame.mu + 2.0 * lame.lambda);
  f.L_phys = a2 / lame.K_dr;
  f.L_MW = a2 / (2.0 * lame.K_dr);
  f.L_1D = a2 / (2.0 * lame.mu + lame.lambda);
  return f;
}

std::optional<double> StabilizationFamily::by_name(const std::string& name, double nu) const {
  if (name == "L_min") return L_min;
  if (name == "L_phys") return L_phys;
  if (name == "L_MW") return L_MW;
  if (name == "L_1D") return L_1D;
  if (name == "L_opt") {
    if (std::abs(nu - 0.01) < 1e-12) return 2.5 * L_min;
    if (std::abs(nu - 0.2) < 1e-12) return 2.3 * L_min;
    if (std::abs(nu - 0.4) < 1e-12) return L_1D;
    return std::nullopt;
  }
  return std::nullopt;
}

double fixed_stress_contraction(const BiotConfig& cfg) {
  const Lame l = lame_from_E_nu(cfg.E, cfg.nu);
  const double s = cfg.alpha / cfg.c0;
  return s / (s + 2.0 * l.K_dr);
}

double biot_traction(double t, double h_max) {
  const double d = t - 0.5;
  return 256.0 * h_max * t * t * d * d;
}

namespace {

double quad_form(const CsrMatrix& a, std::span<const double> x) {
  const Vector ax = a.multiply(x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * ax[i];
  return s;
}

CsrMatrix linear_combination(double a, const CsrMatrix& x, double b, const CsrMatrix& y) {
  std::vector<Triplet> t;
  t.reserve(x.nnz() + y.nnz());
  for (const CsrMatrix* m : {&x, &y}) {
    const double s = m == &x ? a : b;
    for (std::size_t i = 0; i < m->rows(); ++i)
      for (std::size_t p = m->row_ptr()[i]; p < m->row_ptr()[i + 1]; ++p)
        t.push_back({i, m->col_idx()[p], s * m->values()[p]});
  }
  return CsrMatrix::from_triplets(x.rows(), x.cols(), std::move(t));
}

}  // namespace

BiotProblem::BiotProblem(const BiotConfig& cfg, std::shared_ptr<const TriMesh> mesh)
    : cfg_(cfg), mesh_(std::move(mesh)), tau_(cfg.tau) {
  cfg_.validate();
  lame_ = lame_from_E_nu(cfg_.E, cfg_.nu);
  family_ = stabilization_family(cfg_.alpha, lame_);
  if (!mesh_) mesh_ = std::make_shared<const TriMesh>(build_lshape_mesh(cfg_.mesh_n));
  p_space_ = std::make_unique<FeSpace>(mesh_, 1);
  u_space_ = std::make_unique<FeSpace>(mesh_, 2, 2);
  p_space_->add_dirichlet({{BoundaryTag::Top}, 0, [](Point2, double) { return 0.0; }});
  u_space_->add_dirichlet({{BoundaryTag::Left, BoundaryTag::ReentrantV}, 0, [](Point2, double) { return 0.0; }});
  u_space_->add_dirichlet({{BoundaryTag::Bottom, BoundaryTag::ReentrantH}, 1, [](Point2, double) { return 0.0; }});
  np_ = p_space_->num_dofs();
  nu_ = u_space_->num_dofs();
  p_bc_ = p_space_->dirichlet_set(0.0);
  u_bc_ = u_space_->dirichlet_set(0.0);
  bc_ = p_space_->dirichlet_set(0.0);
  bc_.merge(u_space_->dirichlet_set(0.0, np_));

  BlockLayout ps({p_space_.get()});
  BlockLayout us({u_space_.get()});
  BlockLayout both({p_space_.get(), u_space_.get()});
  mass_ = assemble(ps, {{BilinearKind::Mass, 0, 0, {}, {}, {}}});
  stiff_ = assemble(ps, {{BilinearKind::Stiffness, 0, 0, {}, {}, {}}});
  const double mu = lame_.mu, lambda = lame_.lambda;
  elastic_ = assemble(us, {{BilinearKind::Elasticity, 0, 0, [mu](const QpContext&) { return mu; },
                            [lambda](const QpContext&) { return lambda; }, {}}});
  div_ = assemble(both, {{BilinearKind::TrialDivTestValue, 0, 1, {}, {}, {}}});
  // (grad p, v) integrated by parts: the lower-right side is free of total
  // traction, so the boundary term drops and the coupling is -(p, div v)
  grad_ = div_.transpose();
  for (double& v : grad_.values()) v = -v;

  CsrMatrix a = elastic_;
  Vector dummy(nu_, 0.0);
  apply_dirichlet(a, dummy, u_bc_);
  mech_lu_ = factor(a);
  prev_ = initial_state();
  load_ = traction_load(0.0);
}

Vector BiotProblem::traction_load(double t) const {
  const double m = biot_traction(t, cfg_.h_max);
  return assemble_boundary_load(*u_space_, BoundaryTag::Top, [m](Point2) { return Vec2{0.0, -m}; });
}

void BiotProblem::begin_time_step(const Vector& prev, double t, double tau) {
  if (prev.size() != size()) throw std::invalid_argument("biot: state size mismatch");
  prev_ = prev;
  tau_ = tau;
  load_ = traction_load(t);
}

void BiotProblem::update_flow_factor(double L) {
  if (L == flow_L_ && tau_ == flow_tau_) return;
  CsrMatrix a = linear_combination(cfg_.c0 + L, mass_, tau_ * cfg_.kappa / cfg_.mu_f, stiff_);
  Vector dummy(np_, 0.0);
  apply_dirichlet(a, dummy, p_bc_);
  flow_lu_ = factor(a);
  flow_L_ = L;
  flow_tau_ = tau_;
}

Vector BiotProblem::residual(const Vector& state) const {
  if (state.size() != size()) throw std::invalid_argument("biot: state size mismatch");
  Vector dp(np_), du(size(), 0.0);
  for (std::size_t i = 0; i < np_; ++i) dp[i] = state[i] - prev_[i];
  for (std::size_t i = np_; i < size(); ++i) du[i] = state[i] - prev_[i];
  const std::span<const double> s(state);
  Vector r(size(), 0.0);
  const Vector m = mass_.multiply(dp);
  const Vector k = stiff_.multiply(s.subspan(0, np_));
  const Vector d = div_.multiply(du);
  const double tk = tau_ * cfg_.kappa / cfg_.mu_f;
  for (std::size_t i = 0; i < np_; ++i) r[i] = cfg_.c0 * m[i] + tk * k[i] + cfg_.alpha * d[i];

  Vector pfull(size(), 0.0);
  std::copy(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(np_), pfull.begin());
  const Vector g = grad_.multiply(pfull);
  const Vector e = elastic_.multiply(s.subspan(np_, nu_));
  for (std::size_t i = 0; i < nu_; ++i) r[np_ + i] = e[i] + cfg_.alpha * g[np_ + i] - load_[i];
  return r;
}

IterativeProblem::StepResult BiotProblem::step(const SchemeParams& params, const Vector& iterate) {
  if (!(params.L > 0.0)) throw std::invalid_argument("biot: L must be positive");
  update_flow_factor(params.L);
  StepResult out;
  out.next = iterate;

  // flow with the lagged displacement
  const Vector r = residual(iterate);
  Vector rhs(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(np_));
  for (double& v : rhs) v = -v;
  zero_dirichlet(rhs, p_bc_);
  const Vector dp = solve(flow_lu_, rhs);
  {
    const double tk = tau_ * cfg_.kappa / cfg_.mu_f;
    const Vector m = mass_.multiply(dp), k = stiff_.multiply(dp);
    double bdd = 0.0, rd = 0.0;
    for (std::size_t i = 0; i < np_; ++i) {
      bdd += dp[i] * ((cfg_.c0 + params.L) * m[i] + tk * k[i]);
      rd += dp[i] * rhs[i];
    }
    out.linear_defect = std::abs(bdd - rd) / std::max(std::abs(bdd), 1e-300);
  }
  for (std::size_t i = 0; i < np_; ++i) out.next[i] += dp[i];

  // mechanics with the new pressure
  Vector pfull(size(), 0.0);
  std::copy(out.next.begin(), out.next.begin() + static_cast<std::ptrdiff_t>(np_), pfull.begin());
  const Vector g = grad_.multiply(pfull);
  Vector mrhs(nu_);
  for (std::size_t i = 0; i < nu_; ++i) mrhs[i] = load_[i] - cfg_.alpha * g[np_ + i];
  zero_dirichlet(mrhs, u_bc_);
  const Vector u = solve(mech_lu_, mrhs);
  std::copy(u.begin(), u.end(), out.next.begin() + static_cast<std::ptrdiff_t>(np_));
  return out;
}

double BiotProblem::flow_norm(double L, const Vector& delta) const {
  const std::span<const double> dp = std::span<const double>(delta).subspan(0, np_);
  const double s = (cfg_.c0 + L) * quad_form(mass_, dp) + tau_ * cfg_.kappa / cfg_.mu_f * quad_form(stiff_, dp);
  return std::sqrt(std::max(s, 0.0));
}

double BiotProblem::mech_norm(const Vector& delta) const {
  const std::span<const double> du = std::span<const double>(delta).subspan(np_, nu_);
  return std::sqrt(std::max(quad_form(elastic_, du), 0.0));
}

double BiotProblem::p_l2(const Vector& v) const {
  return std::sqrt(std::max(quad_form(mass_, std::span<const double>(v).subspan(0, np_)), 0.0));
}

double BiotProblem::u_l2(const Vector& v) const {
  const std::span<const double> s(v);
  return weighted_norm(*mesh_, {{{}, NormSelector::VectorValue, 0}}, {{u_space_.get(), s.subspan(np_, nu_)}});
}

double BiotProblem::increment_norm(const SchemeParams& params, const Vector&, const Vector& delta) const {
  return flow_norm(params.L, delta) + mech_norm(delta);
}

BiotEstimate BiotProblem::eta(double L, const Vector& current, const Vector& previous) const {
  Vector d(size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = current[i] - previous[i];
  const double p2 = p_l2(d) * p_l2(d);
  const double u2 = u_l2(d) * u_l2(d);
  const double a = cfg_.alpha, tk = tau_ * cfg_.kappa / cfg_.mu_f;
  BiotEstimate e;
  e.flow = std::sqrt(L * L / (L + cfg_.c0) * p2 + a * a / tk * u2);
  e.mech = std::sqrt(a * a / lame_.lambda * fixed_stress_contraction(cfg_) * p2);
  e.total = e.flow + e.mech;
  return e;
}

std::vector<EstimateValue> BiotProblem::estimate(const SchemeParams& params, const Vector& current,
                                                 const Vector& previous) const {
  return {{"eta_5to5", SchemeId::BIOT_FIXED_STRESS, eta(params.L, current, previous).total, 0.0}};
}

std::vector<double> BiotProblem::field_norms(const Vector& v) const { return {p_l2(v), u_l2(v)}; }

double BiotProblem::residual_norm(const Vector& state) const {
  Vector r = residual(state);
  zero_dirichlet(r, bc_);
  return norm2(r);
}

Vector BiotProblem::monolithic_solve() const {
  const std::size_t n = size();
  const double tk = tau_ * cfg_.kappa / cfg_.mu_f, a = cfg_.alpha;
  std::vector<Triplet> t;
  t.reserve(mass_.nnz() + stiff_.nnz() + elastic_.nnz() + grad_.nnz() + div_.nnz());
  auto add = [&t](const CsrMatrix& m, double s, std::size_t ro, std::size_t co) {
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p)
        t.push_back({ro + i, co + m.col_idx()[p], s * m.values()[p]});
  };
  add(mass_, cfg_.c0, 0, 0);
  add(stiff_, tk, 0, 0);
  add(div_, a, 0, 0);
  add(grad_, a, 0, 0);
  add(elastic_, 1.0, np_, np_);
  CsrMatrix m = CsrMatrix::from_triplets(n, n, std::move(t));

  Vector rhs(n, 0.0);
  const Vector mp = mass_.multiply(std::span<const double>(prev_).subspan(0, np_));
  Vector uprev(n, 0.0);
  std::copy(prev_.begin() + static_cast<std::ptrdiff_t>(np_), prev_.end(),
            uprev.begin() + static_cast<std::ptrdiff_t>(np_));
  const Vector du = div_.multiply(uprev);
  for (std::size_t i = 0; i < np_; ++i) rhs[i] = cfg_.c0 * mp[i] + a * du[i];
  for (std::size_t i = 0; i < nu_; ++i) rhs[np_ + i] = load_[i];
  apply_dirichlet(m, rhs, bc_);

  // symmetric diagonal equilibration; the blocks differ by ~20 orders of magnitude
  Vector s(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(m.at(i, i));
    if (d > 0.0) s[i] = 1.0 / std::sqrt(d);
  }
  auto& vals = m.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) vals[p] *= s[i] * s[m.col_idx()[p]];
  for (std::size_t i = 0; i < n; ++i) rhs[i] *= s[i];
  Vector x = solve(factor(m), rhs);
  for (std::size_t i = 0; i < n; ++i) x[i] *= s[i];
  return x;
}

}  // namespace poroadapt
