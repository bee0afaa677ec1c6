// Acceptance checks, one result line per criterion.
// Usage: acceptance [1 2 ... 9]   (no argument runs all of them)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "poroadapt/bench.hpp"

using namespace poroadapt;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig config(const std::string& text) {
  auto cs = parse_config_text(text);
  if (cs.size() != 1) throw std::logic_error("acceptance: expected one config");
  return cs.front();
}

int l_iterations_in_step(const RunResult& r, int step) {
  int n = 0;
  for (const auto& rec : r.records)
    if (rec.step == step && rec.scheme == SchemeId::TWOPHASE_L) ++n;
  return n;
}

// ---------------------------------------------------------------------------

Verdict criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  TwoPhaseConfig cfg;
  cfg.mesh_n = 2;
  cfg.gamma = 0.7;
  TwoPhaseProblem p(cfg);
  p.begin_time_step(p.initial_state(), cfg.tau, cfg.tau);
  std::vector<bool> skip(p.size(), false);
  for (auto d : p.dirichlet().dofs) skip[d] = true;
  std::mt19937 rng(2024);
  const double eps[] = {1e-4, 1e-5, 1e-6};
  double worst_lo = 1e300, worst_hi = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    // saturations strictly inside (0, 1)
    const Vector x = oracles::random_vector(p.size(), rng, 0.2, 0.8);
    const Vector d = oracles::random_vector(p.size(), rng);
    const CsrMatrix j = p.matrix({SchemeId::TWOPHASE_NEWTON, 0.0}, x);
    auto r = [&](const Vector& s) { return p.residual(s); };
    double e[3];
    for (int i = 0; i < 3; ++i) e[i] = oracles::fd_directional_error(r, j, x, d, eps[i], skip);
    for (int i = 0; i < 2; ++i) {
      const double ratio = e[i] / e[i + 1];
      worst_lo = std::min(worst_lo, ratio);
      worst_hi = std::max(worst_hi, ratio);
    }
  }
  // first-order differences: each tenfold reduction of eps cuts the error tenfold
  v.require(worst_lo >= 5.0 && worst_hi <= 20.0,
            "error ratios per decade in [" + fmt("%.3g", worst_lo) + ", " + fmt("%.3g", worst_hi) + "] within [5, 20]");
  const double t = seconds_since(t0);
  v.require(t < 5.0, "runtime " + fmt("%.2f", t) + " s < 5 s");
  return v;
}

Verdict criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  const std::string base = "problem=twophase\nmesh_n=40\ntau=0.1\nT=1\n";
  {
    const auto o = run_config(config(base + "algorithm=newton\ntwophase.gamma=0.9\n"));
    const double avg = o.summary.average();
    v.require(o.summary.converged && std::abs(avg - 3.3) <= 1.0, "Newton gamma=0.9 average " + fmt("%.3g", avg) + " in 3.3+-1");
  }
  {
    const auto o = run_config(config(base + "algorithm=lscheme\ntwophase.L=10\ntwophase.gamma=0.9\n"));
    const double avg = o.summary.average();
    v.require(o.summary.converged && std::abs(avg - 20.7) <= 0.25 * 20.7,
              "L=10 gamma=0.9 average " + fmt("%.3g", avg) + " in 20.7+-25%");
  }
  for (double g : {0.5, 0.6, 0.7, 0.8, 0.9}) {
    const auto o = run_config(config(base + "algorithm=switching\ntwophase.L=10\ntwophase.gamma=" + format_number(g) + "\n"));
    const int first = l_iterations_in_step(o.result, 1);
    v.require(o.summary.converged && first == 1 && o.summary.l_iterations == 1,
              "switching gamma=" + format_number(g) + " L-iterations " + std::to_string(o.summary.l_iterations) +
                  " (first step " + std::to_string(first) + ") == 1");
  }
  {
    const auto o = run_config(config(base + "algorithm=lscheme\ntwophase.L=1\ntwophase.gamma=0.5\n"));
    v.require(!o.summary.converged, std::string("L=1 gamma=0.5 ") + (o.summary.converged ? "converged" : "diverged"));
  }
  {
    const auto o = run_config(config(base + "algorithm=newton\ntwophase.gamma=0.5\n"));
    v.require(!o.summary.converged, std::string("Newton gamma=0.5 ") +
                                        (o.summary.converged ? "converged, average " + fmt("%.3g", o.summary.average())
                                                             : std::string("diverged")));
  }
  const double t = seconds_since(t0);
  v.require(t < 1200.0, "runtime " + fmt("%.0f", t) + " s < 1200 s");
  return v;
}

Verdict criterion3() {
  Verdict v;
  const std::string base = "problem=twophase\nmesh_n=40\ntau=0.1\nT=1\ntwophase.gamma=0.7\n";
  const auto a = run_config(config(base + "algorithm=adaptive_L\ntwophase.L=1\n"));
  bool down = false, up_after_down = false;
  int downs = 0, ups = 0;
  for (const auto& r : a.result.records) {
    if (r.step != 1) continue;
    if (r.action == Action::L_DOWN) {
      down = true;
      ++downs;
    }
    if (r.action == Action::L_UP) {
      ++ups;
      if (down) up_after_down = true;
    }
  }
  v.require(down && up_after_down, "first step: " + std::to_string(downs) + " L_DOWN, " + std::to_string(ups) +
                                       " L_UP, L_UP after L_DOWN: " + (up_after_down ? "yes" : "no"));
  const auto f = run_config(config(base + "algorithm=lscheme\ntwophase.L=10\n"));
  v.require(a.summary.converged, std::string("adaptive run ") + (a.summary.converged ? "converged" : "diverged"));
  v.require(f.summary.converged && a.summary.average() <= f.summary.average(),
            "average " + fmt("%.3g", a.summary.average()) + " <= fixed L=10 average " + fmt("%.3g", f.summary.average()));
  return v;
}

Verdict criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  // Newton still converges up to n=48 with this discretization; 52 is the
  // first mesh of the family where it breaks down
  const std::string base = "problem=surfactant\nmesh_n=52\ntau=0.1\nT=1\n";
  const auto n = run_config(config(base + "algorithm=newton\n"));
  v.require(!n.summary.converged, std::string("Newton n=52 ") + (n.summary.converged ? "converged" : "diverged"));
  const auto s = run_config(config(base + "algorithm=switching\nsurfactant.C_tol=1.5\n"));
  v.require(s.summary.converged, std::string("switching C_tol=1.5 ") +
                                     (s.summary.converged ? "converged" : "diverged: " + s.result.message));
  const auto a = run_config(config(base + "algorithm=adaptive_tau\nsurfactant.n_fast=10\n"));
  int halves = 0, doubles = 0;
  for (const auto& r : a.result.records) {
    halves += r.action == Action::TAU_HALVE;
    doubles += r.tau_action == Action::TAU_DOUBLE;
  }
  v.require(a.summary.converged && halves >= 1 && doubles >= 1,
            std::string("adaptive tau ") + (a.summary.converged ? "completed" : "failed") + " with " +
                std::to_string(halves) + " TAU_HALVE, " + std::to_string(doubles) + " TAU_DOUBLE");
  const double t = seconds_since(t0);
  v.require(t < 1800.0, "runtime " + fmt("%.0f", t) + " s < 1800 s");
  return v;
}

// Criteria 5 and 6 share their runs.
struct BiotSweep {
  double worst_p = 0.0;
  double worst_u = 0.0;
  double min_eff = 1e300;
  bool all_converged = true;
  std::string failures;
  double seconds = 0.0;
};

const BiotSweep& biot_sweep() {
  static const BiotSweep s = [] {
    BiotSweep r;
    const auto t0 = std::chrono::steady_clock::now();
    for (double nu : {0.01, 0.2, 0.4}) {
      for (const char* name : {"L_min", "L_MW", "L_1D", "L_phys"}) {
        RunConfig c = config("problem=biot\nalgorithm=fixed_stress\nmesh_n=20\nmax_iter=5000\nbiot.nu=" +
                             format_number(nu) + "\nbiot.L=" + name + "\n");
        BiotProblem p(c.biot);
        FixedController ctl({SchemeId::BIOT_FIXED_STRESS, c.biot_start_L()});
        const StoppingRule rule{{{"p", c.tol, true}, {"u", c.tol, true}}, c.max_iter};
        TimeStepping ts;
        ts.tau = c.tau;
        ts.T = c.T;
        const RunResult res = run(p, ctl, rule, ts, true);
        if (res.status != RunStatus::Converged) {
          r.all_converged = false;
          r.failures += " nu=" + format_number(nu) + "/" + name;
          continue;
        }
        for (const auto& rec : res.records)
          if (rec.eff_index) r.min_eff = std::min(r.min_eff, *rec.eff_index);
        for (std::size_t i = 1; i < res.solutions.size(); ++i) {
          p.begin_time_step(res.solutions[i - 1], res.times[i], res.times[i] - res.times[i - 1]);
          const Vector mono = p.monolithic_solve();
          Vector d(mono.size());
          for (std::size_t j = 0; j < d.size(); ++j) d[j] = res.solutions[i][j] - mono[j];
          const double pm = p.p_l2(mono), um = p.u_l2(mono);
          if (pm > 0.0) r.worst_p = std::max(r.worst_p, p.p_l2(d) / pm);
          if (um > 0.0) r.worst_u = std::max(r.worst_u, p.u_l2(d) / um);
        }
      }
    }
    r.seconds = seconds_since(t0);
    return r;
  }();
  return s;
}

Verdict criterion5() {
  Verdict v;
  const BiotSweep& s = biot_sweep();
  v.require(s.all_converged, "12 runs converged" + (s.failures.empty() ? std::string() : " (not:" + s.failures + ")"));
  v.require(s.worst_p <= 1e-5 && s.worst_u <= 1e-5,
            "worst relative L2 difference to the coupled solve p " + fmt("%.3g", s.worst_p) + ", u " + fmt("%.3g", s.worst_u) +
                " <= 1e-5");
  v.require(s.seconds < 600.0, "runtime " + fmt("%.0f", s.seconds) + " s < 600 s");
  return v;
}

Verdict criterion6() {
  Verdict v;
  const BiotSweep& s = biot_sweep();
  v.require(s.all_converged, "runs converged");
  v.require(s.min_eff >= 1.0 - 1e-6, "minimum effectivity index " + fmt("%.4g", s.min_eff) + " >= 1 - 1e-6");
  return v;
}

Verdict criterion7() {
  Verdict v;
  auto total = [](double nu, const std::string& alg, const std::string& L, RunOutput* keep = nullptr) {
    auto o = run_config(config("problem=biot\nmesh_n=40\nmax_iter=5000\nalgorithm=" + alg + "\nbiot.nu=" +
                               format_number(nu) + "\nbiot.L=" + L + "\nbiot.C_inc=1.4\n"));
    const long t = o.summary.converged ? o.summary.total_iterations : -1;
    if (keep) *keep = std::move(o);
    return t;
  };
  for (double nu : {0.01, 0.2}) {
    const long lmin = total(nu, "fixed_stress", "L_min"), lmw = total(nu, "fixed_stress", "L_MW");
    const long l1d = total(nu, "fixed_stress", "L_1D"), lphys = total(nu, "fixed_stress", "L_phys");
    const bool ok = lmin > 0 && lmw > 0 && l1d > 0 && lphys > 0 && lmin > lmw && lmw >= l1d && lmin > lphys;
    v.require(ok, "nu=" + format_number(nu) + ": L_min " + std::to_string(lmin) + ", L_MW " + std::to_string(lmw) +
                      ", L_1D " + std::to_string(l1d) + ", L_phys " + std::to_string(lphys));
  }
  RunOutput adaptive;
  const long lmin = total(0.4, "fixed_stress", "L_min");
  const long a = total(0.4, "adaptive_fs", "L_min", &adaptive);
  int changes = 0;
  for (const auto& r : adaptive.result.records) changes += r.action == Action::L_UP || r.action == Action::L_DOWN;
  v.require(a > 0 && changes == 0 && a == lmin, "nu=0.4 adaptive C_inc=1.4: " + std::to_string(changes) +
                                                    " L changes, total " + std::to_string(a) + " vs L_min " +
                                                    std::to_string(lmin));
  return v;
}

Verdict criterion8() {
  Verdict v;
  std::mt19937 rng(8);

  TwoPhaseConfig tc;
  tc.mesh_n = 8;
  TwoPhaseProblem tp(tc);
  tp.set_circle_saturation(0.0);  // Theta = 0 inside the circle
  const Vector t0 = tp.initial_state();
  tp.begin_time_step(t0, tc.tau, tc.tau);
  SurfactantConfig sc;
  sc.mesh_n = 8;
  SurfactantProblem sp(sc);
  const Vector s0 = sp.initial_state();
  sp.begin_time_step(s0, sc.tau, sc.tau);
  BiotConfig bc;
  bc.mesh_n = 8;
  BiotProblem bp(bc);
  Vector b0 = bp.initial_state();
  bp.begin_time_step(b0, bc.tau, bc.tau);
  b0 = bp.monolithic_solve();

  struct Case {
    IterativeProblem* p;
    SchemeParams params;
    Vector state;
  };
  const std::vector<Case> cases{{&tp, {SchemeId::TWOPHASE_L, 1.0}, t0},
                                {&tp, {SchemeId::TWOPHASE_NEWTON, 1.0}, t0},
                                {&sp, {SchemeId::SURF_L, 0.0}, s0},
                                {&sp, {SchemeId::SURF_NEWTON, 0.0}, s0},
                                {&bp, {SchemeId::BIOT_FIXED_STRESS, bp.family().L_min}, b0}};

  std::map<std::string, double> zero_max;
  bool finite = true;
  for (const auto& c : cases) {
    for (const auto& e : c.p->estimate(c.params, c.state, c.state)) zero_max[e.name] = std::max(zero_max[e.name], std::abs(e.value));
    // degenerate base state plus a perturbation
    for (int trial = 0; trial < 10; ++trial) {
      Vector cur = c.state;
      const Vector r = oracles::random_vector(cur.size(), rng, 0.0, 0.05);
      for (std::size_t i = 0; i < cur.size(); ++i) cur[i] += r[i] * std::max(1.0, std::abs(cur[i]));
      for (const auto& e : c.p->estimate(c.params, cur, c.state))
        if (!std::isfinite(e.value)) finite = false;
      if (!std::isfinite(c.p->increment_norm(c.params, c.state, r))) finite = false;
    }
  }
  bool zeros = zero_max.size() == 6;
  std::string names;
  for (const auto& [n, m] : zero_max) {
    zeros = zeros && m == 0.0;
    names += (names.empty() ? "" : ",") + n;
  }
  v.require(zeros, std::to_string(zero_max.size()) + " estimators (" + names + ") exactly 0 on zero increments");
  v.require(finite, "estimators finite on degenerate states");

  // homogeneity and triangle inequality of the iteration norms
  int hom_fail = 0, tri_fail = 0;
  for (int f = 0; f < 100; ++f) {
    const Case& c = cases[static_cast<std::size_t>(f) % cases.size()];
    const std::size_t n = c.state.size();
    const double scale = std::abs(c.state.empty() ? 1.0 : max_abs(c.state)) + 1.0;
    Vector a = oracles::random_vector(n, rng, -scale, scale), b = oracles::random_vector(n, rng, -scale, scale);
    const double s = std::uniform_real_distribution<double>(-5.0, 5.0)(rng);
    Vector as = a, ab = a;
    for (std::size_t i = 0; i < n; ++i) {
      as[i] *= s;
      ab[i] += b[i];
    }
    const double na = c.p->increment_norm(c.params, c.state, a), nb = c.p->increment_norm(c.params, c.state, b);
    const double nas = c.p->increment_norm(c.params, c.state, as), nab = c.p->increment_norm(c.params, c.state, ab);
    if (std::abs(nas - std::abs(s) * na) > 1e-10 * std::abs(s) * na) ++hom_fail;
    if (nab > (na + nb) * (1.0 + 1e-12)) ++tri_fail;
  }
  v.require(hom_fail == 0 && tri_fail == 0, "100 random fields: " + std::to_string(hom_fail) + " homogeneity and " +
                                                std::to_string(tri_fail) + " triangle violations");
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Verdict criterion9() {
  Verdict v;
  const std::string text =
      "name=det\nproblem=twophase\nalgorithm=[lscheme, switching, adaptive_L]\nmesh_n=10\n"
      "twophase.gamma=0.7\n";
  const std::vector<std::string> extra{
      "name=dets\nproblem=surfactant\nalgorithm=[switching, adaptive_tau]\nmesh_n=10\nT=0.3\n",
      "name=detb\nproblem=biot\nalgorithm=adaptive_fs\nmesh_n=8\nbiot.nu=0.01\nT=0.1\n"};
  std::vector<RunConfig> cs = parse_config_text(text);
  for (const auto& e : extra)
    for (auto& c : parse_config_text(e)) cs.push_back(std::move(c));

  const fs::path root = fs::temp_directory_path() / "poroadapt_determinism";
  fs::remove_all(root);
  run_all(cs, (root / "a").string(), true);
  run_all(cs, (root / "b").string(), true);
  int same = 0, differ = 0;
  for (const auto& c : cs) {
    const std::string name = run_id(c) + ".csv";
    const std::string a = slurp(root / "a" / name), b = slurp(root / "b" / name);
    if (!a.empty() && a == b) ++same;
    else ++differ;
  }
  const bool summary_same = slurp(root / "a" / "summary.csv") == slurp(root / "b" / "summary.csv");
  v.require(differ == 0 && summary_same, std::to_string(same) + " of " + std::to_string(cs.size()) +
                                             " traces byte-identical, summary " + (summary_same ? "identical" : "differs"));
  fs::remove_all(root);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> all{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                  criterion6, criterion7, criterion8, criterion9};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(all.size())) {
      std::fprintf(stderr, "acceptance: unknown criterion '%s'\n", argv[i]);
      return 1;
    }
    which.push_back(k);
  }
  if (which.empty())
    for (int k = 1; k <= static_cast<int>(all.size()); ++k) which.push_back(k);

  int failed = 0;
  for (int k : which) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      v = all[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    std::printf("criterion %d: %s (%.1f s) %s\n", k, v.pass ? "PASS" : "FAIL", seconds_since(t0), v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
