// parlab: config-driven verification runs for eternal solutions of parabolic
// problems on cylinders. Subcommands: run, regress, schema.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "parlab/runner.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

bool is_config_error(parlab::errc c) {
  using parlab::errc;
  switch (c) {
    case errc::config_error:
    case errc::bad_expression:
    case errc::bad_grid:
    case errc::bad_window:
    case errc::empty_interior:
    case errc::origin_outside:
    case errc::negative_c:
    case errc::drift_too_large:
    case errc::ellipticity_violated:
    case errc::asymmetric_a:
    case errc::mixed_term_too_large:
      return true;
    default:
      return false;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw parlab::Error(parlab::errc::config_error, "cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

int do_run(const std::string& config_path, std::string out_dir, int workers_override) {
  parlab::ExperimentConfig cfg = parlab::parse_config_text(read_file(config_path));
  if (out_dir.empty()) {
    if (const char* env = std::getenv("PARLAB_OUT")) out_dir = env;
  }
  if (workers_override > 0) cfg.workers = workers_override;

  parlab::RunResult res = parlab::run(cfg, out_dir);
  for (const auto& c : res.checks)
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  value=" << c.value
              << " threshold=" << c.threshold << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
  std::cout << (res.overall_pass ? "overall: pass" : "overall: FAIL") << "  ("
            << res.wall_time_sec << " s)\n";
  return res.overall_pass ? kExitPass : kExitCheckFailed;
}

int do_regress(const std::string& golden, const std::string& fresh, const std::string& tol_file,
               double default_tol) {
  parlab::json tolerances = parlab::json::object();
  if (!tol_file.empty()) {
    try {
      tolerances = parlab::json::parse(read_file(tol_file));
    } catch (const std::exception& e) {
      throw parlab::Error(parlab::errc::config_error,
                          std::string("tolerance file is not valid JSON: ") + e.what());
    }
  }
  auto diffs = parlab::regress(golden, fresh, tolerances, default_tol);
  for (const auto& d : diffs) std::cout << "DIFF " << d.path << ": " << d.what << "\n";
  if (diffs.empty()) {
    std::cout << "no drift\n";
    return kExitPass;
  }
  return kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "parlab: desk-scale verification of the structure theory of eternal solutions\n"
      "of uniformly parabolic problems on cylinders with zero lateral data"};
  app.require_subcommand(1);

  std::string config_path, out_dir, golden, fresh, tol_file;
  int workers = 0;
  double default_tol = 1e-9;

  auto* run_cmd = app.add_subcommand("run", "execute an experiment config");
  run_cmd->add_option("config", config_path, "experiment config JSON")->required();
  run_cmd->add_option("--out", out_dir,
                      "output directory (overrides PARLAB_OUT and the config's output_dir)");
  run_cmd->add_option("--workers", workers, "max concurrent experiments in a suite");

  auto* regress_cmd = app.add_subcommand("regress", "diff two run directories");
  regress_cmd->add_option("golden", golden, "golden run directory")->required();
  regress_cmd->add_option("fresh", fresh, "fresh run directory")->required();
  regress_cmd->add_option("--tolerances", tol_file,
                          "JSON map of field-path substrings to relative tolerances");
  regress_cmd->add_option("--tol", default_tol, "default relative tolerance (1e-9)");

  auto* schema_cmd = app.add_subcommand("schema", "print the config schema");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return do_run(config_path, out_dir, workers);
    if (regress_cmd->parsed()) return do_regress(golden, fresh, tol_file, default_tol);
    if (schema_cmd->parsed()) {
      std::cout << parlab::config_schema().dump(2) << "\n";
      return kExitPass;
    }
  } catch (const parlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == parlab::errc::missing_golden) return kExitConfig;
    return is_config_error(e.code()) ? kExitConfig : kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitConfig;
}
