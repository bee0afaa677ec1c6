#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "poroadapt/bench.hpp"

using namespace poroadapt;
namespace fs = std::filesystem;

namespace {

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("minimal config picks problem defaults") {
  const auto cs = parse_config_text("# comment\nproblem = biot\nalgorithm = fixed_stress\n");
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].problem == ProblemKind::Biot);
  CHECK(cs[0].tau == 0.01);
  CHECK(cs[0].T == 0.5);
  CHECK(cs[0].biot.tau == 0.01);
  CHECK(cs[0].biot_start_L() == doctest::Approx(cs[0].biot.alpha * cs[0].biot.alpha /
                                               (4 * lame_from_E_nu(1e11, 0.2).mu + 2 * lame_from_E_nu(1e11, 0.2).lambda)));

  const auto tp = parse_config_text("problem=twophase\nalgorithm=newton\ntwophase.gamma=0.6\nmesh_n=8\n");
  CHECK(tp[0].tau == 0.1);
  CHECK(tp[0].T == 1.0);
  CHECK(tp[0].twophase.gamma == 0.6);
  CHECK(tp[0].twophase.mesh_n == 8);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config_text("problem=twophase\nalgorithm=newton\nbogus=1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("problem=twophase\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("problem=biot\nalgorithm=adaptive_tau\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("problem=twophase\nalgorithm=newton\ntau=0.1\ntau=0.2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("problem=twophase\nalgorithm=newton\ntau=abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("problem=twophase\nalgorithm=newton\ntau\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("/nonexistent/path.cfg"), ConfigError);
  CHECK(algorithm_valid_for(ProblemKind::Surfactant, Algorithm::AdaptiveTau));
  CHECK_FALSE(algorithm_valid_for(ProblemKind::Twophase, Algorithm::AdaptiveTau));
  CHECK_FALSE(algorithm_valid_for(ProblemKind::Biot, Algorithm::Newton));
}

TEST_CASE("sweeps expand to a Cartesian product") {
  const auto r = parse_config_text("problem=twophase\nalgorithm=newton\nsweep.twophase.gamma=[0.5..0.9 step 0.1]\n");
  REQUIRE(r.size() == 5);
  CHECK(r[0].twophase.gamma == 0.5);
  CHECK(r[4].twophase.gamma == doctest::Approx(0.9));
  CHECK(run_id(r[1]) == "run_gamma-0.6");

  const auto p = parse_config_text("name=x\nproblem=twophase\nalgorithm=lscheme\ntwophase.L=[1, 10]\ntau=[0.1,0.05,0.025]\n");
  REQUIRE(p.size() == 6);
  CHECK(p[0].twophase.L == 1.0);
  CHECK(p[0].tau == 0.1);
  CHECK(p[1].tau == 0.05);
  CHECK(p[3].twophase.L == 10.0);
  CHECK(run_id(p[5]) == "x_L-10_tau-0.025");

  CHECK(parse_config_text("problem=twophase\nalgorithm=newton\ntwophase.gamma=[]\n").empty());

  const auto a = parse_config_text("problem=surfactant\nalgorithm=[newton, adaptive_tau]\n");
  REQUIRE(a.size() == 2);
  CHECK(a[1].algorithm == Algorithm::AdaptiveTau);
  CHECK(run_id(a[0]) == "run_algorithm-newton");
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(2413) == "2413");
}

TEST_CASE("traces and summary on a small run") {
  const auto cs = parse_config_text("name=tiny\nproblem=twophase\nalgorithm=switching\nmesh_n=4\nT=0.2\n");
  const fs::path dir = fs::temp_directory_path() / "poroadapt_bench_test";
  fs::remove_all(dir);
  const auto rows = run_all(cs, dir.string(), true);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].converged);
  CHECK(rows[0].accepted_steps == 2);
  CHECK(rows[0].l_iterations + rows[0].newton_iterations == rows[0].total_iterations);

  const RunOutput out = run_config(cs[0]);
  CHECK(static_cast<long>(out.result.records.size()) == rows[0].total_iterations);
  const std::string trace = slurp(dir / "tiny.csv");
  CHECK(count_lines(trace) == out.result.records.size() + 1);
  CHECK(trace.rfind("step,time,iter,scheme,L,tau,eta_inc,", 0) == 0);
  const std::string summary = slurp(dir / "summary.csv");
  CHECK(count_lines(summary) == 2);
  CHECK(summary.find("tiny,") != std::string::npos);
  fs::remove_all(dir);
}
