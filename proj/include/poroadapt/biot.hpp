#pragma once

#include <memory>
#include <optional>
#include <string>

#include "poroadapt/assembly.hpp"
#include "poroadapt/engine.hpp"
#include "poroadapt/fe_space.hpp"

namespace poroadapt {

struct BiotConfig {
  double E = 1e11;
  double nu = 0.2;
  double alpha = 0.9;
  double c0 = 1e-11;
  double kappa = 1e-13;
  double mu_f = 1.0;
  double tau = 0.01;
  double T = 0.5;
  double L = 0.0;  // 0 selects L_min
  double C_inc = 1.4;
  double h_max = 1e10;
  double tol = 1e-6;
  int mesh_n = 40;

  void validate() const;
};

struct Lame {
  double mu = 0.0;
  double lambda = 0.0;
  double K_dr = 0.0;
};

/// Plane (d = 2) conversion; K_dr = mu + lambda.
Lame lame_from_E_nu(double E, double nu);

struct StabilizationFamily {
  double L_min = 0.0;   // alpha^2 / (4 mu + 2 lambda)
  double L_phys = 0.0;  // alpha^2 / K_dr
  double L_MW = 0.0;    // alpha^2 / (2 K_dr)
  double L_1D = 0.0;    // alpha^2 / (2 mu + lambda)

  /// L_min, L_phys, L_MW, L_1D or L_opt (tuned per nu: 2.5 L_min, 2.3 L_min, L_1D).
  std::optional<double> by_name(const std::string& name, double nu) const;
};

StabilizationFamily stabilization_family(double alpha, const Lame& lame);

/// Contraction factor (alpha/c0) / (alpha/c0 + 2 K_dr).
double fixed_stress_contraction(const BiotConfig& cfg);

struct BiotEstimate {
  double flow = 0.0;
  double mech = 0.0;
  double total = 0.0;
};

/// Vertical traction magnitude on the top edge at time t.
double biot_traction(double t, double h_max);

/// State layout: [p (P1), u_x (P2), u_y (P2)] on the L-shaped domain.
class BiotProblem : public IterativeProblem {
 public:
  explicit BiotProblem(const BiotConfig& cfg, std::shared_ptr<const TriMesh> mesh = nullptr);

  const BiotConfig& config() const { return cfg_; }
  const Lame& lame() const { return lame_; }
  const StabilizationFamily& family() const { return family_; }
  const FeSpace& p_space() const { return *p_space_; }
  const FeSpace& u_space() const { return *u_space_; }
  std::size_t num_p() const { return np_; }

  std::size_t size() const override { return np_ + nu_; }
  Vector initial_state() const override { return Vector(size(), 0.0); }
  void begin_time_step(const Vector& prev, double t, double tau) override;
  Vector initial_iterate() const override { return prev_; }
  StepResult step(const SchemeParams& params, const Vector& iterate) override;
  double increment_norm(const SchemeParams& params, const Vector& at, const Vector& delta) const override;
  std::vector<EstimateValue> estimate(const SchemeParams& params, const Vector& current,
                                      const Vector& previous) const override;
  /// L2 norms of p and u.
  std::vector<double> field_norms(const Vector& v) const override;
  double residual_norm(const Vector& state) const override;

  BiotEstimate eta(double L, const Vector& current, const Vector& previous) const;
  double flow_norm(double L, const Vector& delta) const;
  double mech_norm(const Vector& delta) const;
  /// L2 norms of the p and u parts.
  double p_l2(const Vector& v) const;
  double u_l2(const Vector& v) const;

  /// Coupled residual of the implicit Euler step at the current time level.
  Vector residual(const Vector& state) const;
  /// One direct solve of the coupled step; the problem must be positioned by begin_time_step.
  Vector monolithic_solve() const;

  /// Traction load vector on the u block at time t.
  Vector traction_load(double t) const;
  const CsrMatrix& mechanics_matrix() const { return elastic_; }
  const DirichletSet& dirichlet() const { return bc_; }

 private:
  void update_flow_factor(double L);

  BiotConfig cfg_;
  Lame lame_;
  StabilizationFamily family_;
  std::shared_ptr<const TriMesh> mesh_;
  std::unique_ptr<FeSpace> p_space_;
  std::unique_ptr<FeSpace> u_space_;
  std::size_t np_ = 0;
  std::size_t nu_ = 0;
  DirichletSet p_bc_;
  DirichletSet u_bc_;  // indexed within the u block
  DirichletSet bc_;    // whole state
  CsrMatrix mass_;
  CsrMatrix stiff_;
  CsrMatrix elastic_;
  CsrMatrix grad_;  // -(p_j, div v_i), u rows by p columns
  CsrMatrix div_;   // (div u_j, q_i), p rows by u columns
  LuFactor mech_lu_;
  LuFactor flow_lu_;
  double flow_L_ = -1.0;
  double flow_tau_ = -1.0;
  Vector prev_;
  Vector load_;
  double tau_ = 0.01;
};

}  // namespace poroadapt
