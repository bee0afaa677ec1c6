#pragma once

#include <memory>

#include "poroadapt/assembly.hpp"
#include "poroadapt/engine.hpp"
#include "poroadapt/fe_space.hpp"

namespace poroadapt {

struct TwoPhaseConfig {
  double gamma = 0.9;
  double kappa = 1e-5;
  double L = 1.0;
  double tau = 0.1;
  double T = 1.0;
  double C_tol = 1.0;
  double eps_deg = 1e-12;
  int mesh_n = 40;

  void validate() const;
};

/// Pointwise constitutive values of the Kirchhoff-transformed model with
/// s = Theta^gamma, lambda_t = s^gamma + (1-s)^gamma, f_w = s^gamma / lambda_t.
struct TwoPhaseCoefficients {
  double s = 0.0;
  double ds = 0.0;         // s'(Theta), zero where Theta < eps_deg
  double lambda_t = 0.0;
  double dlambda_t = 0.0;  // d lambda_t / ds
  double f_w = 0.0;
  double dfw = 0.0;        // (f_w o s)'(Theta)
  double dlambda = 0.0;    // (lambda_t o s)'(Theta)
  double F = 0.0;          // f_w kappa lambda_t
  double dF = 0.0;         // (f_w o s)' kappa lambda_t + f_w kappa (lambda_t o s)'
};

TwoPhaseCoefficients twophase_constitutive(double gamma, double theta, double kappa, double eps_deg = 1e-12);

/// State layout: [Theta (P1 nodal), P (P1 nodal)].
class TwoPhaseProblem : public IterativeProblem {
 public:
  explicit TwoPhaseProblem(const TwoPhaseConfig& cfg, std::shared_ptr<const TriMesh> mesh = nullptr);

  const TwoPhaseConfig& config() const { return cfg_; }
  const FeSpace& space() const { return *theta_space_; }
  std::size_t num_nodes() const { return nn_; }

  std::size_t size() const override { return 2 * nn_; }
  Vector initial_state() const override;
  void begin_time_step(const Vector& prev, double t, double tau) override;
  Vector initial_iterate() const override;
  StepResult step(const SchemeParams& params, const Vector& iterate) override;
  double increment_norm(const SchemeParams& params, const Vector& at, const Vector& delta) const override;
  std::vector<EstimateValue> estimate(const SchemeParams& params, const Vector& current,
                                      const Vector& previous) const override;
  std::vector<double> field_norms(const Vector& v) const override;
  double residual_norm(const Vector& state) const override;

  /// <R(state), (q_i, r_i)> for every basis pair, no constraints applied.
  Vector residual(const Vector& state) const;
  /// Scheme matrix at `state` before Dirichlet elimination.
  CsrMatrix matrix(const SchemeParams& params, const Vector& state) const;
  const DirichletSet& dirichlet() const { return bc_; }

  double eta_L_to_N(const Vector& current, const Vector& previous, double L) const;
  double eta_N_to_N(const Vector& current, const Vector& previous) const;
  double eta_L_to_L(const Vector& current, const Vector& previous, double L) const;

  /// Lowers the nodal saturation of the initial state to `s` inside the circle;
  /// used to build non-degenerate test states.
  void set_circle_saturation(double s) { circle_s_ = s; }

 private:
  TwoPhaseCoefficients coeff(double theta) const;
  double eta_generic(const Vector& current, const Vector& previous, int kind, double L) const;

  TwoPhaseConfig cfg_;
  std::shared_ptr<const TriMesh> mesh_;
  std::unique_ptr<FeSpace> theta_space_;
  std::unique_ptr<FeSpace> p_space_;
  std::size_t nn_ = 0;
  CsrMatrix mass_;
  DirichletSet bc_;
  Vector prev_;
  double tau_ = 0.1;
  double circle_s_ = 0.0;
};

}  // namespace poroadapt
