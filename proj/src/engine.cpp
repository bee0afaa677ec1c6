#include "poroadapt/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poroadapt {

std::string_view to_string(SchemeId id) {
  switch (id) {
    case SchemeId::TWOPHASE_L: return "TWOPHASE_L";
    case SchemeId::TWOPHASE_NEWTON: return "TWOPHASE_NEWTON";
    case SchemeId::SURF_L: return "SURF_L";
    case SchemeId::SURF_NEWTON: return "SURF_NEWTON";
    case SchemeId::BIOT_FIXED_STRESS: return "BIOT_FIXED_STRESS";
  }
  return "?";
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::NONE: return "NONE";
    case Action::SWITCH_TO: return "SWITCH_TO";
    case Action::L_UP: return "L_UP";
    case Action::L_DOWN: return "L_DOWN";
    case Action::TAU_HALVE: return "TAU_HALVE";
    case Action::TAU_DOUBLE: return "TAU_DOUBLE";
    case Action::STOP_CONVERGED: return "STOP_CONVERGED";
    case Action::STOP_DIVERGED: return "STOP_DIVERGED";
  }
  return "?";
}

const EstimateValue* IterationRecord::estimate(std::string_view name) const {
  for (const auto& e : estimates)
    if (e.name == name) return &e;
  return nullptr;
}

const EstimateValue* IterationRecord::estimate_for(SchemeId target) const {
  for (const auto& e : estimates)
    if (e.target == target) return &e;
  return nullptr;
}

bool check_stopping(const std::vector<double>& delta_norms, const std::vector<double>& state_norms,
                    const StoppingRule& rule) {
  if (delta_norms.size() != rule.fields.size() || state_norms.size() != rule.fields.size()) {
    throw std::invalid_argument("check_stopping: field count mismatch");
  }
  for (std::size_t i = 0; i < rule.fields.size(); ++i) {
    const auto& f = rule.fields[i];
    const double bound = f.relative ? f.tol * state_norms[i] : f.tol;
    if (!(delta_norms[i] <= bound)) return false;
  }
  return true;
}

double effectivity_index(double prev_estimator, double eta_inc_now) {
  if (!(eta_inc_now > 0.0)) throw std::domain_error("effectivity_index: zero incremental error");
  return prev_estimator / eta_inc_now;
}

SwitchingController::SwitchingController(SchemeParams robust, SchemeId newton, std::string robust_to_newton,
                                         std::string newton_to_newton, double c_tol)
    : robust_(robust), current_(robust), newton_(newton), r2n_(std::move(robust_to_newton)), n2n_(std::move(newton_to_newton)),
      c_tol_(c_tol) {
  if (c_tol_ < 1.0) throw std::invalid_argument("SwitchingController: C_tol must be >= 1");
}

Decision SwitchingController::decide(const IterationRecord& r, const SchemeParams& current) {
  Decision d{Action::NONE, current};
  if (current.scheme == robust_.scheme) {
    const EstimateValue* e = r.estimate(r2n_);
    if (e && e->value <= c_tol_ * e->reference) d = {Action::SWITCH_TO, {newton_, current.L}};
  } else {
    const EstimateValue* e = r.estimate(n2n_);
    if (e && e->value > e->reference) d = {Action::SWITCH_TO, robust_};
  }
  current_ = d.next;
  return d;
}

AdaptiveLController::AdaptiveLController(SchemeParams start, std::string estimator, double c_up, double shrink)
    : current_(start), estimator_(std::move(estimator)), c_up_(c_up), shrink_(shrink) {}

Decision AdaptiveLController::decide(const IterationRecord& r, const SchemeParams& current) {
  current_ = current;
  const EstimateValue* e = r.estimate(estimator_);
  if (!e) return {Action::NONE, current};
  SchemeParams next = current;
  Action a = Action::NONE;
  if (e->value <= e->reference && e->value >= shrink_ * e->reference) {
    next.L = shrink_ * current.L;
    a = Action::L_DOWN;
  } else if (e->value > e->reference) {
    next.L = c_up_ * current.L;
    a = Action::L_UP;
  }
  current_ = next;
  return {a, next};
}

AdaptiveFixedStressController::AdaptiveFixedStressController(SchemeParams start, std::string estimator,
                                                             double l_min, double l_phys, double c_inc,
                                                             double trigger, double eff_guard, double decrease)
    : current_(start), estimator_(std::move(estimator)), l_min_(l_min), l_phys_(l_phys), c_inc_(c_inc),
      trigger_(trigger), eff_guard_(eff_guard), decrease_(decrease) {}

SchemeParams AdaptiveFixedStressController::begin_step() {
  increase_mode_ = !has_increased_;
  return current_;
}

Decision AdaptiveFixedStressController::decide(const IterationRecord& r, const SchemeParams& current) {
  current_ = current;
  const EstimateValue* e = r.estimate(estimator_);
  if (!e || !r.eff_index) return {Action::NONE, current};
  if (!(e->value >= trigger_ * e->reference && *r.eff_index < eff_guard_)) return {Action::NONE, current};
  SchemeParams next = current;
  Action a;
  if (increase_mode_) {
    next.L = std::min(l_phys_, c_inc_ * current.L);
    has_increased_ = true;
    a = Action::L_UP;
  } else {
    next.L = std::max(l_min_, decrease_ * current.L);
    has_increased_ = false;
    a = Action::L_DOWN;
  }
  current_ = next;
  return {a, next};
}

TimeStepController::TimeStepController(SchemeParams newton, std::string estimator, double threshold)
    : params_(newton), estimator_(std::move(estimator)), threshold_(threshold) {}

Decision TimeStepController::decide(const IterationRecord& r, const SchemeParams& current) {
  const EstimateValue* e = r.estimate(estimator_);
  if (e && e->value > threshold_) return {Action::TAU_HALVE, current};
  return {Action::NONE, current};
}

namespace {

bool all_finite(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

StepOutcome run_time_step(IterativeProblem& problem, Controller& controller, const StoppingRule& rule, int step,
                          double time, double tau, Action tau_action) {
  if (rule.max_iter < 1) throw std::invalid_argument("run_time_step: max_iter must be >= 1");
  StepOutcome out;
  SchemeParams params = controller.begin_step();
  Vector iterate = problem.initial_iterate();

  for (int k = 1; k <= rule.max_iter; ++k) {
    IterationRecord rec;
    rec.step = step;
    rec.time = time;
    rec.k = k;
    rec.scheme = params.scheme;
    rec.L = params.L;
    rec.tau = tau;
    rec.tau_action = k == 1 ? tau_action : Action::NONE;

    IterativeProblem::StepResult sr;
    try {
      sr = problem.step(params, iterate);
    } catch (const SingularMatrixError&) {
      rec.action = Action::STOP_DIVERGED;
      out.records.push_back(std::move(rec));
      return out;
    }
    if (!all_finite(sr.next)) {
      rec.action = Action::STOP_DIVERGED;
      out.records.push_back(std::move(rec));
      return out;
    }
    rec.linear_defect = sr.linear_defect;
    Vector delta(sr.next.size());
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = sr.next[i] - iterate[i];

    rec.eta_inc = problem.increment_norm(params, iterate, delta);
    rec.estimates = problem.estimate(params, sr.next, iterate);
    for (auto& e : rec.estimates) {
      e.reference = problem.increment_norm({e.target, params.L}, sr.next, delta);
    }
    if (!out.records.empty() && rec.eta_inc > 0.0) {
      if (const EstimateValue* prev = out.records.back().estimate_for(params.scheme)) {
        rec.eff_index = effectivity_index(prev->value, rec.eta_inc);
      }
    }
    rec.residual_norm = problem.residual_norm(sr.next);

    if (!std::isfinite(rec.eta_inc)) {
      rec.action = Action::STOP_DIVERGED;
      out.records.push_back(std::move(rec));
      return out;
    }
    if (check_stopping(problem.field_norms(delta), problem.field_norms(sr.next), rule)) {
      rec.action = Action::STOP_CONVERGED;
      out.records.push_back(std::move(rec));
      out.converged = true;
      out.state = std::move(sr.next);
      return out;
    }
    if (k == rule.max_iter) {
      rec.action = Action::STOP_DIVERGED;
      out.records.push_back(std::move(rec));
      return out;
    }
    const Decision d = controller.decide(rec, params);
    rec.action = d.action;
    out.records.push_back(std::move(rec));
    if (d.action == Action::TAU_HALVE) {
      out.halve = true;
      return out;
    }
    params = d.next;
    iterate = std::move(sr.next);
  }
  return out;
}

RunResult run(IterativeProblem& problem, Controller& controller, const StoppingRule& rule,
              const TimeStepping& stepping, bool keep_solutions) {
  if (!(stepping.tau > 0.0) || !(stepping.T > 0.0)) throw std::invalid_argument("run: tau and T must be positive");
  RunResult result;
  Vector state = problem.initial_state();
  if (keep_solutions) {
    result.solutions.push_back(state);
    result.times.push_back(0.0);
  }
  double t = 0.0;
  double tau = stepping.tau;
  Action pending = Action::NONE;
  const double t_eps = 1e-12 * stepping.T;
  int step = 0;
  while (t < stepping.T - t_eps) {
    const double tau_try = std::min(tau, stepping.T - t);
    StepOutcome o;
    try {
      problem.begin_time_step(state, t + tau_try, tau_try);
      o = run_time_step(problem, controller, rule, step + 1, t + tau_try, tau_try, pending);
    } catch (const std::exception& ex) {
      result.status = RunStatus::Diverged;
      result.message = ex.what();
      return result;
    }
    pending = Action::NONE;
    const int iterations = static_cast<int>(o.records.size());
    for (auto& r : o.records) result.records.push_back(std::move(r));
    if (o.halve) {
      ++result.failed_attempts;
      tau = 0.5 * tau_try;
      if (tau < stepping.tau_min) {
        result.status = RunStatus::TauUnderflow;
        result.message = "time step fell below tau_min";
        return result;
      }
      continue;
    }
    if (!o.converged) {
      result.status = RunStatus::Diverged;
      result.message = "no convergence in time step " + std::to_string(step + 1);
      return result;
    }
    state = std::move(o.state);
    problem.end_time_step(state);
    t += tau_try;
    ++step;
    result.accepted_steps = step;
    if (keep_solutions) {
      result.solutions.push_back(state);
      result.times.push_back(t);
    }
    if (stepping.adaptive && iterations < stepping.n_fast) {
      tau = 2.0 * tau;
      pending = Action::TAU_DOUBLE;
    }
  }
  return result;
}

}  // namespace poroadapt
