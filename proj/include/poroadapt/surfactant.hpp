#pragma once

#include <memory>

#include "poroadapt/assembly.hpp"
#include "poroadapt/engine.hpp"
#include "poroadapt/fe_space.hpp"

namespace poroadapt {

struct SurfactantConfig {
  double D = 1e-3;
  double a = 0.44;
  double b = 0.0046;
  double theta_r = 0.026;
  double theta_s = 0.42;
  double K_s = 0.12;
  double n_vg = 2.9;
  double alpha_vg = 0.551;
  double L1 = 0.1;
  double L2 = 128.0;
  double tau = 0.1;
  double T = 1.0;
  double C_tol = 1.5;
  double tau_min = 1e-5;
  int n_fast = 5;
  double eps_deg = 1e-12;
  int mesh_n = 40;
  bool eta_transport = false;  // adds the D grad(dc) - dc u term to the estimators

  void validate() const;
};

/// Modified van Genuchten-Mualem values at one point.
struct VgmValues {
  double theta = 0.0;
  double dtheta_dpsi = 0.0;
  double dtheta_dc = 0.0;
  double K = 0.0;
  double dK = 0.0;  // dK/dtheta
};

/// Surface tension factor 1 / (1 - b log(c/a + 1)).
double surface_tension(double c, const SurfactantConfig& cfg);
VgmValues vgm(double psi, double c, const SurfactantConfig& cfg);

/// State layout: [psi (P1 nodal), c (P1 nodal)]. Gravity acts along -y, so the
/// driving gradient is grad(psi) + (0, 1).
class SurfactantProblem : public IterativeProblem {
 public:
  explicit SurfactantProblem(const SurfactantConfig& cfg, std::shared_ptr<const TriMesh> mesh = nullptr);

  const SurfactantConfig& config() const { return cfg_; }
  const FeSpace& space() const { return *space_; }
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

  Vector residual(const Vector& state) const;
  CsrMatrix matrix(const SchemeParams& params, const Vector& state) const;
  const DirichletSet& dirichlet() const { return bc_; }

  double eta_L_to_N(const Vector& current, const Vector& previous) const;
  double eta_N_to_N(const Vector& current, const Vector& previous) const;

  /// Element-constant water flux -K grad(psi + y) of `state`.
  std::vector<Vec2> water_flux(const Vector& state) const;
  const std::vector<Vec2>& flux_prev() const { return flux_; }
  /// Overrides the frozen water flux (tests).
  void set_flux(std::vector<Vec2> flux) { flux_ = std::move(flux); }
  /// Turns gravity and the source off (tests).
  void set_gravity(bool on) { gravity_ = on; }

 private:
  double eta_generic(const Vector& current, const Vector& previous, bool newton) const;
  Vec2 drive(Vec2 grad_psi) const { return gravity_ ? Vec2{grad_psi.x, grad_psi.y + 1.0} : grad_psi; }
  double source(Point2 x) const;

  SurfactantConfig cfg_;
  std::shared_ptr<const TriMesh> mesh_;
  std::unique_ptr<FeSpace> space_;
  std::unique_ptr<FeSpace> c_space_;
  std::size_t nn_ = 0;
  CsrMatrix mass_;
  DirichletSet bc_;
  Vector prev_;
  std::vector<Vec2> flux_;
  double tau_ = 0.1;
  bool gravity_ = true;
};

}  // namespace poroadapt
