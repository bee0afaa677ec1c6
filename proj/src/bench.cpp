#include "poroadapt/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

namespace poroadapt {

namespace {

struct NamedProblem {
  ProblemKind kind;
  std::string_view name;
};
constexpr NamedProblem kProblems[] = {
    {ProblemKind::Twophase, "twophase"}, {ProblemKind::Surfactant, "surfactant"}, {ProblemKind::Biot, "biot"}};

struct NamedAlgorithm {
  Algorithm alg;
  std::string_view name;
};
constexpr NamedAlgorithm kAlgorithms[] = {
    {Algorithm::LScheme, "lscheme"},         {Algorithm::Newton, "newton"},
    {Algorithm::Switching, "switching"},     {Algorithm::AdaptiveL, "adaptive_L"},
    {Algorithm::AdaptiveTau, "adaptive_tau"}, {Algorithm::FixedStress, "fixed_stress"},
    {Algorithm::AdaptiveFs, "adaptive_fs"}};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(out))
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const char* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: '" + key + "' expects true or false, got '" + v + "'");
}

using Table = std::map<std::string, std::function<void(RunConfig&, const std::string&)>>;

const Table& setters() {
  static const Table t = [] {
    Table m;
    auto dbl = [&m](const std::string& key, auto proj) {
      m[key] = [key, proj](RunConfig& c, const std::string& v) { proj(c) = to_double(key, v); };
    };
    auto integer = [&m](const std::string& key, auto proj) {
      m[key] = [key, proj](RunConfig& c, const std::string& v) { proj(c) = to_int(key, v); };
    };
    m["name"] = [](RunConfig& c, const std::string& v) { c.name = v; };
    m["output_dir"] = [](RunConfig& c, const std::string& v) { c.output_dir = v; };
    m["problem"] = [](RunConfig& c, const std::string& v) {
      const auto p = parse_problem(v);
      if (!p) throw ConfigError("config: unknown problem '" + v + "'");
      c.problem = *p;
    };
    m["algorithm"] = [](RunConfig& c, const std::string& v) {
      const auto a = parse_algorithm(v);
      if (!a) throw ConfigError("config: unknown algorithm '" + v + "'");
      c.algorithm = *a;
    };
    integer("mesh_n", [](RunConfig& c) -> int& { return c.mesh_n; });
    integer("max_iter", [](RunConfig& c) -> int& { return c.max_iter; });
    dbl("tau", [](RunConfig& c) -> double& { return c.tau; });
    dbl("T", [](RunConfig& c) -> double& { return c.T; });
    dbl("tol", [](RunConfig& c) -> double& { return c.tol; });

    dbl("twophase.gamma", [](RunConfig& c) -> double& { return c.twophase.gamma; });
    dbl("twophase.kappa", [](RunConfig& c) -> double& { return c.twophase.kappa; });
    dbl("twophase.L", [](RunConfig& c) -> double& { return c.twophase.L; });
    dbl("twophase.C_tol", [](RunConfig& c) -> double& { return c.twophase.C_tol; });
    dbl("twophase.eps_deg", [](RunConfig& c) -> double& { return c.twophase.eps_deg; });

    dbl("surfactant.D", [](RunConfig& c) -> double& { return c.surfactant.D; });
    dbl("surfactant.a", [](RunConfig& c) -> double& { return c.surfactant.a; });
    dbl("surfactant.b", [](RunConfig& c) -> double& { return c.surfactant.b; });
    dbl("surfactant.theta_r", [](RunConfig& c) -> double& { return c.surfactant.theta_r; });
    dbl("surfactant.theta_s", [](RunConfig& c) -> double& { return c.surfactant.theta_s; });
    dbl("surfactant.K_s", [](RunConfig& c) -> double& { return c.surfactant.K_s; });
    dbl("surfactant.n_vg", [](RunConfig& c) -> double& { return c.surfactant.n_vg; });
    dbl("surfactant.alpha_vg", [](RunConfig& c) -> double& { return c.surfactant.alpha_vg; });
    dbl("surfactant.L1", [](RunConfig& c) -> double& { return c.surfactant.L1; });
    dbl("surfactant.L2", [](RunConfig& c) -> double& { return c.surfactant.L2; });
    dbl("surfactant.C_tol", [](RunConfig& c) -> double& { return c.surfactant.C_tol; });
    dbl("surfactant.tau_min", [](RunConfig& c) -> double& { return c.surfactant.tau_min; });
    dbl("surfactant.eps_deg", [](RunConfig& c) -> double& { return c.surfactant.eps_deg; });
    integer("surfactant.n_fast", [](RunConfig& c) -> int& { return c.surfactant.n_fast; });
    m["surfactant.eta_transport"] = [](RunConfig& c, const std::string& v) {
      c.surfactant.eta_transport = to_bool("surfactant.eta_transport", v);
    };

    dbl("biot.E", [](RunConfig& c) -> double& { return c.biot.E; });
    dbl("biot.nu", [](RunConfig& c) -> double& { return c.biot.nu; });
    dbl("biot.alpha", [](RunConfig& c) -> double& { return c.biot.alpha; });
    dbl("biot.c0", [](RunConfig& c) -> double& { return c.biot.c0; });
    dbl("biot.kappa", [](RunConfig& c) -> double& { return c.biot.kappa; });
    dbl("biot.mu_f", [](RunConfig& c) -> double& { return c.biot.mu_f; });
    dbl("biot.C_inc", [](RunConfig& c) -> double& { return c.biot.C_inc; });
    dbl("biot.h_max", [](RunConfig& c) -> double& { return c.biot.h_max; });
    m["biot.L"] = [](RunConfig& c, const std::string& v) {
      if (v.rfind("L_", 0) != 0) to_double("biot.L", v);
      c.biot_L = v;
    };
    return m;
  }();
  return t;
}

// Problem defaults for the keys shared by all problems.
struct Defaults {
  double tau;
  double T;
};

Defaults problem_defaults(ProblemKind p) {
  switch (p) {
    case ProblemKind::Twophase: return {0.1, 1.0};
    case ProblemKind::Surfactant: return {0.1, 1.0};
    case ProblemKind::Biot: return {0.01, 0.5};
  }
  return {0.1, 1.0};
}

std::vector<std::string> expand_sweep(const std::string& key, const std::string& body) {
  std::vector<std::string> out;
  const std::string inner = trim(body);
  if (inner.empty()) return out;
  const auto dots = inner.find("..");
  if (dots != std::string::npos) {
    const auto step_pos = inner.find("step");
    if (step_pos == std::string::npos || step_pos < dots)
      throw ConfigError("config: range sweep for '" + key + "' needs the form [a..b step s]");
    const double a = to_double(key, trim(inner.substr(0, dots)));
    const double b = to_double(key, trim(inner.substr(dots + 2, step_pos - dots - 2)));
    const double s = to_double(key, trim(inner.substr(step_pos + 4)));
    if (!(s > 0.0)) throw ConfigError("config: sweep step for '" + key + "' must be positive");
    const double span = a <= b ? b - a : a - b;
    const long count = std::lround(std::floor(span / s + 1e-9)) + 1;
    const double dir = a <= b ? 1.0 : -1.0;
    for (long i = 0; i < count; ++i) out.push_back(format_number(a + dir * static_cast<double>(i) * s));
    return out;
  }
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("config: empty entry in sweep for '" + key + "'");
    out.push_back(item);
  }
  return out;
}

void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
  const auto& t = setters();
  const auto it = t.find(key);
  if (it == t.end()) throw ConfigError("config: unknown key '" + key + "'");
  it->second(c, value);
}

void finalize(RunConfig& c, const std::map<std::string, std::string>& set) {
  const Defaults d = problem_defaults(c.problem);
  if (!set.count("tau")) c.tau = d.tau;
  if (!set.count("T")) c.T = d.T;
  if (!algorithm_valid_for(c.problem, c.algorithm)) {
    throw ConfigError("config: algorithm '" + std::string(to_string(c.algorithm)) + "' is not available for problem '" +
                      std::string(to_string(c.problem)) + "'");
  }
  if (c.mesh_n < 1) throw ConfigError("config: mesh_n must be >= 1");
  if (c.max_iter < 1) throw ConfigError("config: max_iter must be >= 1");
  c.twophase.tau = c.surfactant.tau = c.biot.tau = c.tau;
  c.twophase.T = c.surfactant.T = c.biot.T = c.T;
  c.twophase.mesh_n = c.surfactant.mesh_n = c.biot.mesh_n = c.mesh_n;
  c.biot.tol = c.tol;
  try {
    switch (c.problem) {
      case ProblemKind::Twophase: c.twophase.validate(); break;
      case ProblemKind::Surfactant: c.surfactant.validate(); break;
      case ProblemKind::Biot:
        c.biot.validate();
        c.biot_start_L();
        break;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace

std::string_view to_string(ProblemKind p) {
  for (const auto& e : kProblems)
    if (e.kind == p) return e.name;
  return "?";
}

std::string_view to_string(Algorithm a) {
  for (const auto& e : kAlgorithms)
    if (e.alg == a) return e.name;
  return "?";
}

std::optional<ProblemKind> parse_problem(std::string_view s) {
  for (const auto& e : kProblems)
    if (e.name == s) return e.kind;
  return std::nullopt;
}

std::optional<Algorithm> parse_algorithm(std::string_view s) {
  for (const auto& e : kAlgorithms)
    if (e.name == s) return e.alg;
  return std::nullopt;
}

bool algorithm_valid_for(ProblemKind p, Algorithm a) {
  switch (p) {
    case ProblemKind::Twophase:
      return a == Algorithm::LScheme || a == Algorithm::Newton || a == Algorithm::Switching ||
             a == Algorithm::AdaptiveL;
    case ProblemKind::Surfactant:
      return a == Algorithm::LScheme || a == Algorithm::Newton || a == Algorithm::Switching ||
             a == Algorithm::AdaptiveTau;
    case ProblemKind::Biot: return a == Algorithm::FixedStress || a == Algorithm::AdaptiveFs;
  }
  return false;
}

double RunConfig::biot_start_L() const {
  const StabilizationFamily f = stabilization_family(biot.alpha, lame_from_E_nu(biot.E, biot.nu));
  if (biot_L.rfind("L_", 0) == 0) {
    const auto v = f.by_name(biot_L, biot.nu);
    if (!v) throw ConfigError("config: biot.L '" + biot_L + "' is not defined for nu=" + format_number(biot.nu));
    return *v;
  }
  const double v = to_double("biot.L", biot_L);
  if (!(v > 0.0)) throw ConfigError("config: biot.L must be positive");
  return v;
}

std::vector<RunConfig> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> fixed;
  std::vector<std::pair<std::string, std::vector<std::string>>> sweeps;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config: line " + std::to_string(lineno) + " is not key=value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("sweep.", 0) == 0) key = key.substr(6);
    if (!setters().count(key)) throw ConfigError("config: unknown key '" + key + "'");
    if (fixed.count(key) || std::any_of(sweeps.begin(), sweeps.end(), [&](const auto& s) { return s.first == key; }))
      throw ConfigError("config: key '" + key + "' given twice");
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') throw ConfigError("config: unterminated sweep for '" + key + "'");
      sweeps.emplace_back(key, expand_sweep(key, value.substr(1, value.size() - 2)));
    } else {
      fixed[key] = value;
    }
  }
  auto swept = [&](const std::string& key) {
    return std::any_of(sweeps.begin(), sweeps.end(), [&](const auto& s) { return s.first == key; });
  };
  for (const char* req : {"problem", "algorithm"}) {
    if (!fixed.count(req) && !swept(req)) throw ConfigError(std::string("config: missing required key '") + req + "'");
  }

  std::vector<RunConfig> out;
  std::vector<std::size_t> idx(sweeps.size(), 0);
  for (const auto& s : sweeps)
    if (s.second.empty()) return out;
  while (true) {
    RunConfig c;
    std::map<std::string, std::string> set = fixed;
    for (std::size_t s = 0; s < sweeps.size(); ++s) {
      const auto& [k, values] = sweeps[s];
      set[k] = values[idx[s]];
      c.sweep_values.push_back(k + "=" + values[idx[s]]);
    }
    apply_key(c, "problem", set.at("problem"));
    for (const auto& [k, v] : set)
      if (k != "problem") apply_key(c, k, v);
    finalize(c, set);
    out.push_back(std::move(c));
    // odometer, last sweep fastest
    std::size_t s = sweeps.size();
    while (s > 0) {
      --s;
      if (++idx[s] < sweeps[s].second.size()) break;
      idx[s] = 0;
      if (s == 0) return out;
    }
    if (sweeps.empty()) return out;
  }
}

std::vector<RunConfig> parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string run_id(const RunConfig& cfg) {
  std::string id = cfg.name;
  for (const auto& sv : cfg.sweep_values) {
    std::string part = sv;
    const auto dot = part.rfind('.', part.find('='));
    if (dot != std::string::npos) part = part.substr(dot + 1);
    id += "_" + part;
  }
  for (char& ch : id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '_';
    if (ch == '=') ch = '-';
    else if (!ok) ch = '_';
  }
  return id;
}

namespace {

struct Built {
  std::unique_ptr<IterativeProblem> problem;
  std::unique_ptr<Controller> controller;
  StoppingRule rule;
  TimeStepping stepping;
};

Built build(const RunConfig& c) {
  Built b;
  b.stepping.tau = c.tau;
  b.stepping.T = c.T;
  b.rule.max_iter = c.max_iter;
  switch (c.problem) {
    case ProblemKind::Twophase: {
      b.problem = std::make_unique<TwoPhaseProblem>(c.twophase);
      b.rule.fields = {{"Theta", c.tol, false}, {"P", c.tol, false}};
      const SchemeParams l{SchemeId::TWOPHASE_L, c.twophase.L};
      const SchemeParams n{SchemeId::TWOPHASE_NEWTON, c.twophase.L};
      switch (c.algorithm) {
        case Algorithm::LScheme: b.controller = std::make_unique<FixedController>(l); break;
        case Algorithm::Newton: b.controller = std::make_unique<FixedController>(n); break;
        case Algorithm::Switching:
          b.controller = std::make_unique<SwitchingController>(l, SchemeId::TWOPHASE_NEWTON, "eta_1to2", "eta_2to2",
                                                               c.twophase.C_tol);
          break;
        case Algorithm::AdaptiveL: b.controller = std::make_unique<AdaptiveLController>(l, "eta_1to1"); break;
        default: break;
      }
      break;
    }
    case ProblemKind::Surfactant: {
      b.problem = std::make_unique<SurfactantProblem>(c.surfactant);
      b.rule.fields = {{"psi", c.tol, false}, {"c", c.tol, false}};
      const SchemeParams l{SchemeId::SURF_L, 0.0};
      const SchemeParams n{SchemeId::SURF_NEWTON, 0.0};
      switch (c.algorithm) {
        case Algorithm::LScheme: b.controller = std::make_unique<FixedController>(l); break;
        case Algorithm::Newton: b.controller = std::make_unique<FixedController>(n); break;
        case Algorithm::Switching:
          b.controller = std::make_unique<SwitchingController>(l, SchemeId::SURF_NEWTON, "eta_3to4", "eta_4to4",
                                                               c.surfactant.C_tol);
          break;
        case Algorithm::AdaptiveTau:
          b.controller = std::make_unique<TimeStepController>(n, "eta_4to4");
          b.stepping.adaptive = true;
          b.stepping.n_fast = c.surfactant.n_fast;
          b.stepping.tau_min = c.surfactant.tau_min;
          break;
        default: break;
      }
      break;
    }
    case ProblemKind::Biot: {
      auto p = std::make_unique<BiotProblem>(c.biot);
      b.rule.fields = {{"p", c.tol, true}, {"u", c.tol, true}};
      const SchemeParams s{SchemeId::BIOT_FIXED_STRESS, c.biot_start_L()};
      if (c.algorithm == Algorithm::FixedStress) {
        b.controller = std::make_unique<FixedController>(s);
      } else {
        b.controller = std::make_unique<AdaptiveFixedStressController>(s, "eta_5to5", p->family().L_min,
                                                                       p->family().L_phys, c.biot.C_inc);
      }
      b.problem = std::move(p);
      break;
    }
  }
  if (!b.controller) throw ConfigError("config: algorithm not available for this problem");
  return b;
}

std::string params_string(const RunConfig& c) {
  std::string s = "mesh_n=" + std::to_string(c.mesh_n) + ";tau=" + format_number(c.tau) + ";T=" + format_number(c.T);
  switch (c.problem) {
    case ProblemKind::Twophase:
      s += ";gamma=" + format_number(c.twophase.gamma) + ";L=" + format_number(c.twophase.L);
      break;
    case ProblemKind::Surfactant:
      if (c.algorithm == Algorithm::AdaptiveTau) s += ";n_fast=" + std::to_string(c.surfactant.n_fast);
      break;
    case ProblemKind::Biot:
      s += ";nu=" + format_number(c.biot.nu) + ";L=" + c.biot_L;
      if (c.algorithm == Algorithm::AdaptiveFs) s += ";C_inc=" + format_number(c.biot.C_inc);
      break;
  }
  return s;
}

std::string action_text(const IterationRecord& r) {
  std::string a;
  if (r.tau_action != Action::NONE) a = to_string(r.tau_action);
  if (r.action != Action::NONE) {
    if (!a.empty()) a += "+";
    a += to_string(r.action);
  }
  return a.empty() ? std::string(to_string(Action::NONE)) : a;
}

}  // namespace

RunOutput run_config(const RunConfig& cfg) {
  RunOutput out;
  out.summary.run_id = run_id(cfg);
  out.summary.params = params_string(cfg);
  Built b = build(cfg);
  out.result = run(*b.problem, *b.controller, b.rule, b.stepping);
  const auto& recs = out.result.records;
  out.summary.total_iterations = static_cast<long>(recs.size());
  for (const auto& r : recs) {
    if (r.scheme == SchemeId::TWOPHASE_L || r.scheme == SchemeId::SURF_L) ++out.summary.l_iterations;
    if (r.scheme == SchemeId::TWOPHASE_NEWTON || r.scheme == SchemeId::SURF_NEWTON) ++out.summary.newton_iterations;
  }
  out.summary.failed_steps = out.result.failed_attempts;
  out.summary.accepted_steps = out.result.accepted_steps;
  out.summary.converged = out.result.status == RunStatus::Converged;
  return out;
}

void write_trace_csv(std::ostream& os, const std::vector<IterationRecord>& records) {
  static const char* const kEstimators[] = {"eta_1to2", "eta_2to2", "eta_1to1", "eta_3to4", "eta_4to4", "eta_5to5"};
  os << "step,time,iter,scheme,L,tau,eta_inc";
  for (const char* e : kEstimators) os << ',' << e;
  os << ",eff_index,action\n";
  for (const auto& r : records) {
    os << r.step << ',' << format_number(r.time) << ',' << r.k << ',' << to_string(r.scheme) << ','
       << format_number(r.L) << ',' << format_number(r.tau) << ',' << format_number(r.eta_inc);
    for (const char* e : kEstimators) {
      os << ',';
      if (const EstimateValue* v = r.estimate(e)) os << format_number(v->value);
    }
    os << ',';
    if (r.eff_index) os << format_number(*r.eff_index);
    os << ',' << action_text(r) << '\n';
  }
}

void write_summary_header(std::ostream& os) {
  os << "run_id,params,total_iterations,l_iterations,newton_iterations,accepted_steps,failed_steps,average,converged\n";
}

void write_summary_row(std::ostream& os, const SummaryRow& r) {
  os << r.run_id << ',' << r.params << ',' << r.total_iterations << ',' << r.l_iterations << ','
     << r.newton_iterations << ',' << r.accepted_steps << ',' << r.failed_steps << ',' << format_number(r.average())
     << ',' << (r.converged ? "true" : "false") << '\n';
}

std::vector<SummaryRow> run_all(const std::vector<RunConfig>& configs, const std::string& out_dir, bool quiet) {
  namespace fs = std::filesystem;
  std::vector<SummaryRow> rows;
  if (configs.empty()) return rows;
  const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  fs::create_directories(dir);
  const fs::path summary = dir / "summary.csv";
  const bool fresh = !fs::exists(summary) || fs::file_size(summary) == 0;
  std::ofstream sum(summary, std::ios::app);
  if (!sum) throw std::runtime_error("cannot open " + summary.string());
  if (fresh) write_summary_header(sum);

  for (const auto& cfg : configs) {
    SummaryRow row;
    std::vector<IterationRecord> records;
    try {
      RunOutput o = run_config(cfg);
      row = o.summary;
      records = std::move(o.result.records);
    } catch (const std::exception& e) {
      row.run_id = run_id(cfg);
      row.params = params_string(cfg);
      row.converged = false;
      if (!quiet) std::cerr << row.run_id << ": " << e.what() << '\n';
    }
    std::ofstream trace(dir / (row.run_id + ".csv"));
    write_trace_csv(trace, records);
    write_summary_row(sum, row);
    sum.flush();
    if (!quiet) {
      std::cout << row.run_id << ": " << (row.converged ? "converged" : "diverged") << ", " << row.total_iterations
                << " iterations over " << row.accepted_steps << " steps\n";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

std::string render(const std::string& title, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(header.size(), 0);
  for (std::size_t j = 0; j < header.size(); ++j) w[j] = header[j].size();
  for (const auto& r : rows)
    for (std::size_t j = 0; j < r.size(); ++j) w[j] = std::max(w[j], r[j].size());
  std::string out = title + "\n";
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t j = 0; j < r.size(); ++j) out += (j ? " | " : "") + pad(r[j], w[j]);
    out += "\n";
  };
  line(header);
  std::size_t total = 0;
  for (auto x : w) total += x + 3;
  out += std::string(total > 3 ? total - 3 : 0, '-') + "\n";
  for (const auto& r : rows) line(r);
  return out;
}

std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

RunOutput safe_run(const RunConfig& c, bool quiet) {
  try {
    RunOutput o = run_config(c);
    if (!quiet) std::cerr << run_id(c) << " " << params_string(c) << ": " << o.summary.total_iterations << "\n";
    return o;
  } catch (const std::exception& e) {
    if (!quiet) std::cerr << run_id(c) << ": " << e.what() << "\n";
    RunOutput o;
    o.result.status = RunStatus::Diverged;
    return o;
  }
}

std::string twophase_table(int mesh_n, bool quiet) {
  struct Row {
    const char* label;
    Algorithm alg;
    double L;
    const char* reference[5];
  };
  const Row rows[] = {
      {"L_1", Algorithm::LScheme, 1.0, {"3.7", "5.1", "9.3", "-", "-"}},
      {"L_2", Algorithm::LScheme, 10.0, {"20.7", "20.2", "18.6", "15.6", "11.8"}},
      {"Newton", Algorithm::Newton, 1.0, {"3.3", "3.3", "3.3", "3.5", "-"}},
      {"L_1-A", Algorithm::AdaptiveL, 1.0, {"3.7", "5.1", "6.8", "5", "7.6"}},
      {"L_2-A", Algorithm::AdaptiveL, 10.0, {"13.3", "12.8", "13.4", "13.3", "11.8"}},
      {"L_1-N", Algorithm::Switching, 1.0, {"3.0(1)", "3.1(1)", "3.2(1)", "-", "-"}},
      {"L_2-N", Algorithm::Switching, 10.0, {"3.3(1)", "3.4(1)", "3.4(1)", "3.5(1)", "3.6(1)"}},
  };
  const double gammas[] = {0.9, 0.8, 0.7, 0.6, 0.5};
  std::vector<std::string> header{"scheme"};
  for (double g : gammas) header.push_back("gamma=" + format_number(g) + " [reference]");
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    std::vector<std::string> line{r.label};
    for (int j = 0; j < 5; ++j) {
      RunConfig c;
      c.name = std::string("twophase_") + r.label;
      c.problem = ProblemKind::Twophase;
      c.algorithm = r.alg;
      c.mesh_n = c.twophase.mesh_n = mesh_n;
      c.twophase.gamma = gammas[j];
      c.twophase.L = r.L;
      const RunOutput o = safe_run(c, quiet);
      std::string cell = "-";
      if (o.summary.converged) {
        cell = fixed1(o.summary.average());
        if (r.alg == Algorithm::Switching) cell += "(" + std::to_string(o.summary.l_iterations) + ")";
      }
      line.push_back(cell + " [" + r.reference[j] + "]");
    }
    body.push_back(std::move(line));
  }
  return render("two-phase flow: average iterations per time step, mesh n=" + std::to_string(mesh_n) +
                    ", tau=0.1, T=1 (- marks divergence)",
                header, body);
}

std::string biot_table(int mesh_n, bool quiet) {
  struct Row {
    const char* label;
    Algorithm alg;
    const char* L;
    double c_inc;
    const char* reference[3];
  };
  const Row rows[] = {
      {"L_min", Algorithm::FixedStress, "L_min", 1.0, {"2413", "812", "438"}},
      {"L_MW", Algorithm::FixedStress, "L_MW", 1.0, {"576", "488", "399"}},
      {"L_phys", Algorithm::FixedStress, "L_phys", 1.0, {"593", "476", "320"}},
      {"L_1D", Algorithm::FixedStress, "L_1D", 1.0, {"568", "386", "247"}},
      {"L_A(1.25)", Algorithm::AdaptiveFs, "L_min", 1.25, {"589", "398", "438"}},
      {"L_A(1.3)", Algorithm::AdaptiveFs, "L_min", 1.3, {"501", "353", "438"}},
      {"L_A(1.4)", Algorithm::AdaptiveFs, "L_min", 1.4, {"491", "349", "438"}},
      {"L_opt", Algorithm::FixedStress, "L_opt", 1.0, {"465", "341", "247"}},
  };
  const double nus[] = {0.01, 0.2, 0.4};
  std::vector<std::string> header{"scheme"};
  for (double nu : nus) header.push_back("nu=" + format_number(nu) + " [reference]");
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    std::vector<std::string> line{r.label};
    for (int j = 0; j < 3; ++j) {
      RunConfig c;
      c.name = std::string("biot_") + r.label;
      c.problem = ProblemKind::Biot;
      c.algorithm = r.alg;
      c.tau = c.biot.tau = 0.01;
      c.T = c.biot.T = 0.5;
      c.mesh_n = c.biot.mesh_n = mesh_n;
      c.biot.nu = nus[j];
      c.biot.C_inc = r.c_inc;
      c.biot_L = r.L;
      c.max_iter = 5000;
      const RunOutput o = safe_run(c, quiet);
      const std::string cell = o.summary.converged ? std::to_string(o.summary.total_iterations) : "-";
      line.push_back(cell + " [" + r.reference[j] + "]");
    }
    body.push_back(std::move(line));
  }
  return render("Biot: total iterations, mesh n=" + std::to_string(mesh_n) + ", tau=0.01, T=0.5 (- marks divergence)",
                header, body);
}

std::string surfactant_figure(const std::vector<int>& meshes, bool quiet) {
  struct Row {
    const char* label;
    Algorithm alg;
    int n_fast;
  };
  const Row rows[] = {{"L", Algorithm::LScheme, 5},
                      {"N", Algorithm::Newton, 5},
                      {"L/N", Algorithm::Switching, 5},
                      {"N/tau(5)", Algorithm::AdaptiveTau, 5},
                      {"N/tau(10)", Algorithm::AdaptiveTau, 10}};
  std::vector<std::string> header{"scheme"};
  for (int n : meshes) header.push_back("n=" + std::to_string(n));
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    std::vector<std::string> line{r.label};
    for (int n : meshes) {
      RunConfig c;
      c.name = std::string("surfactant_") + r.label;
      c.problem = ProblemKind::Surfactant;
      c.algorithm = r.alg;
      c.mesh_n = c.surfactant.mesh_n = n;
      c.surfactant.n_fast = r.n_fast;
      const RunOutput o = safe_run(c, quiet);
      std::string cell = "-";
      if (o.summary.converged) {
        cell = std::to_string(o.summary.total_iterations);
        if (r.alg == Algorithm::Switching) {
          cell += " (" + std::to_string(o.summary.l_iterations) + "/" + std::to_string(o.summary.newton_iterations) + ")";
        } else if (r.alg == Algorithm::AdaptiveTau) {
          long failed = 0, attempt = 0;
          for (const auto& rec : o.result.records) {
            ++attempt;
            if (rec.action == Action::TAU_HALVE) {
              failed += attempt;
              attempt = 0;
            } else if (rec.action == Action::STOP_CONVERGED) {
              attempt = 0;
            }
          }
          cell += " (" + std::to_string(o.summary.total_iterations - failed) + "/" + std::to_string(failed) + ")";
        }
      }
      line.push_back(cell);
    }
    body.push_back(std::move(line));
  }
  return render("surfactant transport: total iterations, tau=0.1, T=1 (L/N split for switching, successful/failed "
                "Newton iterations for adaptive time stepping, - marks divergence)",
                header, body);
}

}  // namespace

std::string reproduce_table(const std::string& name, int mesh_n, const std::string& out_dir, bool quiet) {
  std::string text;
  if (name == "twophase_table") {
    text = twophase_table(mesh_n > 0 ? mesh_n : 40, quiet);
  } else if (name == "biot_table") {
    text = biot_table(mesh_n > 0 ? mesh_n : 40, quiet);
  } else if (name == "surfactant_figure") {
    text = surfactant_figure(mesh_n > 0 ? std::vector<int>{mesh_n} : std::vector<int>{10, 20, 40, 60}, quiet);
  } else {
    throw ConfigError("unknown table '" + name + "' (twophase_table, biot_table, surfactant_figure)");
  }
  namespace fs = std::filesystem;
  const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  fs::create_directories(dir);
  std::ofstream(dir / (name + ".txt")) << text;
  return text;
}

}  // namespace poroadapt
