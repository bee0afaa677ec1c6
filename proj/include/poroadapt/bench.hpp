#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "poroadapt/biot.hpp"
#include "poroadapt/engine.hpp"
#include "poroadapt/surfactant.hpp"
#include "poroadapt/twophase.hpp"

namespace poroadapt {

enum class ProblemKind { Twophase, Surfactant, Biot };
enum class Algorithm { LScheme, Newton, Switching, AdaptiveL, AdaptiveTau, FixedStress, AdaptiveFs };

std::string_view to_string(ProblemKind p);
std::string_view to_string(Algorithm a);
std::optional<ProblemKind> parse_problem(std::string_view s);
std::optional<Algorithm> parse_algorithm(std::string_view s);
bool algorithm_valid_for(ProblemKind p, Algorithm a);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string name = "run";
  ProblemKind problem = ProblemKind::Twophase;
  Algorithm algorithm = Algorithm::Newton;
  int mesh_n = 40;
  double tau = 0.1;
  double T = 1.0;
  int max_iter = 200;
  double tol = 1e-6;
  std::string output_dir;

  TwoPhaseConfig twophase;
  SurfactantConfig surfactant;
  BiotConfig biot;
  std::string biot_L = "L_min";  // a family name or a number

  /// Sweep assignments that produced this config, "key=value" in order.
  std::vector<std::string> sweep_values;

  /// Stabilization value the Biot run starts from.
  double biot_start_L() const;
};

/// Parses flat key=value text with dotted sections. A value written as
/// [a, b, c] or [a..b step s] sweeps that key; several sweeps form a
/// Cartesian product in order of appearance.
std::vector<RunConfig> parse_config_text(const std::string& text);
std::vector<RunConfig> parse_config(const std::string& path);

struct SummaryRow {
  std::string run_id;
  std::string params;
  long total_iterations = 0;
  long l_iterations = 0;
  long newton_iterations = 0;
  int failed_steps = 0;
  int accepted_steps = 0;
  bool converged = false;

  double average() const { return accepted_steps > 0 ? static_cast<double>(total_iterations) / accepted_steps : 0.0; }
};

struct RunOutput {
  SummaryRow summary;
  RunResult result;
};

/// Builds the problem, controller and stopping rule for the configuration.
RunOutput run_config(const RunConfig& cfg);

/// Run id derived from the name and the sweep values.
std::string run_id(const RunConfig& cfg);

std::string format_number(double v);
void write_trace_csv(std::ostream& os, const std::vector<IterationRecord>& records);
void write_summary_header(std::ostream& os);
void write_summary_row(std::ostream& os, const SummaryRow& row);

/// Runs every config, writes <out>/<run_id>.csv traces and appends to
/// <out>/summary.csv. Returns the summary rows.
std::vector<SummaryRow> run_all(const std::vector<RunConfig>& configs, const std::string& out_dir, bool quiet);

/// twophase_table, biot_table or surfactant_figure at the given mesh size;
/// writes <out>/<name>.txt and returns its text.
std::string reproduce_table(const std::string& name, int mesh_n, const std::string& out_dir, bool quiet);

}  // namespace poroadapt
