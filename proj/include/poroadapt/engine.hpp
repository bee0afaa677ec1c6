#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poroadapt/sparse.hpp"

namespace poroadapt {

enum class SchemeId { TWOPHASE_L, TWOPHASE_NEWTON, SURF_L, SURF_NEWTON, BIOT_FIXED_STRESS };
enum class Action { NONE, SWITCH_TO, L_UP, L_DOWN, TAU_HALVE, TAU_DOUBLE, STOP_CONVERGED, STOP_DIVERGED };

std::string_view to_string(SchemeId id);
std::string_view to_string(Action a);

struct SchemeParams {
  SchemeId scheme = SchemeId::TWOPHASE_L;
  double L = 0.0;
};

/// One estimator value. `reference` is the increment measured in the target
/// scheme's norm at the current iterate, the quantity the estimator is compared with.
struct EstimateValue {
  std::string name;
  SchemeId target = SchemeId::TWOPHASE_L;
  double value = 0.0;
  double reference = 0.0;
};

struct IterationRecord {
  int step = 0;
  double time = 0.0;
  int k = 0;
  SchemeId scheme = SchemeId::TWOPHASE_L;
  double L = 0.0;
  double tau = 0.0;
  double eta_inc = 0.0;
  std::vector<EstimateValue> estimates;
  std::optional<double> eff_index;
  Action action = Action::NONE;
  Action tau_action = Action::NONE;  // TAU_DOUBLE applied before this step began
  double linear_defect = 0.0;        // |B(d,d) + <R,d>| relative to B(d,d)
  double residual_norm = 0.0;        // nonlinear residual at the new iterate

  const EstimateValue* estimate(std::string_view name) const;
  const EstimateValue* estimate_for(SchemeId target) const;
};

struct FieldTolerance {
  std::string name;
  double tol = 1e-6;
  bool relative = false;  // compare with tol * ||field^k||
};

struct StoppingRule {
  std::vector<FieldTolerance> fields;
  int max_iter = 200;
};

/// Per-field test: ||delta_f|| <= tol (absolute) or tol * ||state_f|| (relative).
bool check_stopping(const std::vector<double>& delta_norms, const std::vector<double>& state_norms,
                    const StoppingRule& rule);

double effectivity_index(double prev_estimator, double eta_inc_now);

/// A discretized nonlinear problem with a family of linearizations.
class IterativeProblem {
 public:
  virtual ~IterativeProblem() = default;

  virtual std::size_t size() const = 0;
  virtual Vector initial_state() const = 0;

  /// Prepares the time step (t - tau, t] starting from `prev`.
  virtual void begin_time_step(const Vector& prev, double t, double tau) = 0;
  /// prev with the boundary data of the new time level imposed.
  virtual Vector initial_iterate() const = 0;
  virtual void end_time_step(const Vector& solution) { (void)solution; }

  struct StepResult {
    Vector next;
    double linear_defect = 0.0;
  };
  /// One linear solve of the given scheme starting from `iterate`.
  virtual StepResult step(const SchemeParams& params, const Vector& iterate) = 0;

  /// Iteration-dependent norm of `delta` with weights frozen at `at`.
  virtual double increment_norm(const SchemeParams& params, const Vector& at, const Vector& delta) const = 0;

  /// Estimators computed from iterates (current, previous) of scheme `params`.
  virtual std::vector<EstimateValue> estimate(const SchemeParams& params, const Vector& current,
                                              const Vector& previous) const = 0;

  /// Norms of each stopped field of `v`, ordered as the stopping rule.
  virtual std::vector<double> field_norms(const Vector& v) const = 0;

  /// Norm of the nonlinear residual at `state` (Dirichlet rows removed).
  virtual double residual_norm(const Vector& state) const = 0;
};

struct Decision {
  Action action = Action::NONE;
  SchemeParams next;
};

class Controller {
 public:
  virtual ~Controller() = default;
  /// Scheme and parameters for the first iteration of a time step.
  virtual SchemeParams begin_step() = 0;
  virtual Decision decide(const IterationRecord& record, const SchemeParams& current) = 0;
};

/// Always the same scheme.
class FixedController : public Controller {
 public:
  explicit FixedController(SchemeParams p) : params_(p) {}
  SchemeParams begin_step() override { return params_; }
  Decision decide(const IterationRecord&, const SchemeParams& current) override { return {Action::NONE, current}; }

 private:
  SchemeParams params_;
};

/// Robust scheme to Newton when eta_{r->N} <= C_tol * increment; back when
/// eta_{N->N} exceeds the increment. The run starts robust and the active
/// scheme carries over between time steps.
class SwitchingController : public Controller {
 public:
  SwitchingController(SchemeParams robust, SchemeId newton, std::string robust_to_newton,
                      std::string newton_to_newton, double c_tol);
  SchemeParams begin_step() override { return current_; }
  Decision decide(const IterationRecord& record, const SchemeParams& current) override;

 private:
  SchemeParams robust_;
  SchemeParams current_;
  SchemeId newton_;
  std::string r2n_;
  std::string n2n_;
  double c_tol_;
};

/// L <- 0.8 L when the L->L estimator sits in [0.8, 1] times the increment,
/// L <- c_up L when it exceeds the increment. L carries over between steps.
class AdaptiveLController : public Controller {
 public:
  AdaptiveLController(SchemeParams start, std::string estimator, double c_up = 1.4142135623730951,
                      double shrink = 0.8);
  SchemeParams begin_step() override { return current_; }
  Decision decide(const IterationRecord& record, const SchemeParams& current) override;

 private:
  SchemeParams current_;
  std::string estimator_;
  double c_up_;
  double shrink_;
};

/// Adaptive fixed-stress stabilization: when eta >= 10 increment and the
/// effectivity index is below 100, raise L (capped at L_phys) in increase mode
/// or lower it (floored at L_min) otherwise. The mode is chosen at each step
/// start: increase iff L has not been increased before.
class AdaptiveFixedStressController : public Controller {
 public:
  AdaptiveFixedStressController(SchemeParams start, std::string estimator, double l_min, double l_phys,
                                double c_inc, double trigger = 10.0, double eff_guard = 100.0,
                                double decrease = 0.9);
  SchemeParams begin_step() override;
  Decision decide(const IterationRecord& record, const SchemeParams& current) override;
  bool has_increased() const { return has_increased_; }

 private:
  SchemeParams current_;
  std::string estimator_;
  double l_min_;
  double l_phys_;
  double c_inc_;
  double trigger_;
  double eff_guard_;
  double decrease_;
  bool has_increased_ = false;
  bool increase_mode_ = true;
};

/// Newton with step rejection: TAU_HALVE when the Newton estimator exceeds 1.
class TimeStepController : public Controller {
 public:
  TimeStepController(SchemeParams newton, std::string estimator, double threshold = 1.0);
  SchemeParams begin_step() override { return params_; }
  Decision decide(const IterationRecord& record, const SchemeParams& current) override;

 private:
  SchemeParams params_;
  std::string estimator_;
  double threshold_;
};

struct TimeStepping {
  double tau = 0.1;
  double T = 1.0;
  bool adaptive = false;  // enables doubling after fast steps
  int n_fast = 5;
  double tau_min = 1e-5;
};

enum class RunStatus { Converged, Diverged, TauUnderflow };

struct StepOutcome {
  bool converged = false;
  bool halve = false;
  Vector state;
  std::vector<IterationRecord> records;
};

struct RunResult {
  RunStatus status = RunStatus::Converged;
  std::vector<IterationRecord> records;
  std::vector<Vector> solutions;  // one per accepted time step, solutions[0] = initial state
  std::vector<double> times;
  int accepted_steps = 0;
  int failed_attempts = 0;
  std::string message;
};

/// Iterates one time step to convergence, divergence or a TAU_HALVE request.
/// The problem must already be positioned by begin_time_step.
StepOutcome run_time_step(IterativeProblem& problem, Controller& controller, const StoppingRule& rule,
                          int step, double time, double tau, Action tau_action = Action::NONE);

/// Marches from t=0 to T with restarts on TAU_HALVE.
RunResult run(IterativeProblem& problem, Controller& controller, const StoppingRule& rule,
              const TimeStepping& stepping, bool keep_solutions = false);

}  // namespace poroadapt
