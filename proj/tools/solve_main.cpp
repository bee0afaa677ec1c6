#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "poroadapt/bench.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Adaptive linearization and splitting solvers for porous media problems"};
  std::string config_path;
  std::string out_dir = "out";
  std::string table;
  int mesh_n = 0;
  bool quiet = false;
  app.add_option("config", config_path, "key=value run configuration");
  app.add_option("--out", out_dir, "output directory for traces, summary.csv and tables");
  app.add_option("--table", table, "reproduce a table: twophase_table, biot_table or surfactant_figure");
  app.add_option("--mesh-n", mesh_n, "override the mesh resolution")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "suppress progress output");
  CLI11_PARSE(app, argc, argv);

  if (config_path.empty() && table.empty()) {
    std::cerr << "solve: give a config path or --table NAME\n" << app.help();
    return 1;
  }
  try {
    if (!table.empty()) {
      const std::string text = poroadapt::reproduce_table(table, mesh_n, out_dir, quiet);
      if (!quiet) std::cout << text;
      if (config_path.empty()) return 0;
    }
    auto configs = poroadapt::parse_config(config_path);
    for (auto& c : configs) {
      if (mesh_n > 0) c.mesh_n = c.twophase.mesh_n = c.surfactant.mesh_n = c.biot.mesh_n = mesh_n;
      if (c.problem == poroadapt::ProblemKind::Biot && c.mesh_n % 2 != 0) {
        std::cerr << "solve: the Biot mesh needs an even mesh-n\n";
        return 1;
      }
    }
    std::string dir = out_dir;
    if (app.count("--out") == 0 && !configs.empty() && !configs.front().output_dir.empty())
      dir = configs.front().output_dir;
    const auto rows = poroadapt::run_all(configs, dir, quiet);
    for (const auto& r : rows)
      if (!r.converged) return 2;
    return 0;
  } catch (const poroadapt::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "solve: " << e.what() << '\n';
    return 1;
  }
}
