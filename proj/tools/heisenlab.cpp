#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "heisenlab/plot.hpp"
#include "heisenlab/scenario.hpp"
#include "heisenlab/verification.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

struct Overrides {
  std::optional<std::size_t> basis_levels;
  std::optional<double> interior_fraction;
  std::optional<double> tolerance;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool no_plots = false;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--basis-levels", o.basis_levels, "Fock levels per dof")
      ->check(CLI::Range(std::size_t{2}, std::size_t{4096}));
  cmd->add_option("--interior-fraction", o.interior_fraction,
                  "Fraction of the levels compared in identity checks")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--tolerance", o.tolerance, "Override every identity tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", o.out_dir, "Directory for output files");
}

int cmd_run(const std::string& path, const Overrides& o, bool checks) {
  heisenlab::Scenario s = heisenlab::parse_scenario(path);
  if (o.basis_levels) s.basis.levels = *o.basis_levels;
  if (o.interior_fraction) s.basis.interior_fraction = *o.interior_fraction;
  if (o.tolerance) s.tolerance = *o.tolerance;
  if (o.out_dir) s.out_dir = *o.out_dir;
  if (o.no_plots) s.plots = false;
  if (checks) s.checks = true;
  const auto a = heisenlab::run(s);
  const auto& r = a.outcome.report;
  std::cout << s.name << ": max gap " << heisenlab::format_real(r.at("max_gap").get<double>())
            << ", linear " << (r.at("linear_scenario_exactness").get<bool>() ? "yes" : "no")
            << ", status " << r.at("status").get<std::string>() << '\n'
            << "  wrote " << a.csv.string() << '\n'
            << "  wrote " << a.report.string() << '\n';
  for (const auto& p : a.plots) std::cout << "  wrote " << (a.csv.parent_path() / p).string() << '\n';
  return a.outcome.passed ? kExitOk : kExitCheckFailure;
}

int cmd_verify(const std::optional<std::string>& config_path, const Overrides& o) {
  heisenlab::SuiteConfig cfg;
  if (config_path) {
    std::ifstream in(*config_path, std::ios::binary);
    if (!in) throw heisenlab::InvalidArgument("cannot read config '" + *config_path + "'");
    heisenlab::json j;
    try {
      j = heisenlab::json::parse(in);
    } catch (const heisenlab::json::parse_error& e) {
      throw heisenlab::InvalidArgument("config '" + *config_path + "': " + e.what());
    }
    cfg = heisenlab::suite_config_from_json(j);
  }
  if (o.basis_levels) cfg.levels_1dof = *o.basis_levels;
  if (o.interior_fraction) cfg.interior_fraction = *o.interior_fraction;
  if (o.tolerance) cfg.tolerance = *o.tolerance;
  if (o.seed) cfg.seed = *o.seed;

  const auto report = heisenlab::run_all(cfg);
  const std::string text = heisenlab::to_json(report).dump(2) + "\n";
  if (o.out_dir) {
    std::filesystem::create_directories(*o.out_dir);
    const auto path = std::filesystem::path(*o.out_dir) / "verify_report.json";
    heisenlab::write_file_atomic(path, text);
    for (const auto& r : report.results)
      std::printf("%s %-48s error %.3e  tol %.1e\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                  r.measured_error, r.tolerance);
    std::printf("%zu checks, %zu failed; report in %s\n", report.results.size(),
                report.failures(), path.string().c_str());
  } else {
    std::cout << text;
  }
  return report.passed() ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heisenberg-picture operator dynamics in a truncated Fock basis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", heisenlab::kVersion);

  Overrides run_o, verify_o;
  std::string scenario_path, report_path;
  std::optional<std::string> config_path;
  bool run_checks = false;

  CLI::App* run = app.add_subcommand("run", "Simulate a scenario and compare with the classical oracle");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  add_common_flags(run, run_o);
  run->add_flag("--no-plots", run_o.no_plots, "Skip SVG plots");
  run->add_flag("--checks", run_checks, "Also check the Hamilton equations for this Hamiltonian");

  CLI::App* verify = app.add_subcommand("verify", "Run the operator identity checks");
  verify->add_option("--config", config_path, "Suite configuration JSON");
  add_common_flags(verify, verify_o);
  verify->add_option("--seed", verify_o.seed, "Seed for the random Hamiltonians");

  CLI::App* plot = app.add_subcommand("plot", "Render plots for an existing run report");
  plot->add_option("report", report_path, "Run report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(scenario_path, run_o, run_checks);
    if (*verify) return cmd_verify(config_path, verify_o);
    for (const auto& p : heisenlab::plot_report(report_path))
      std::cout << "wrote " << (std::filesystem::path(report_path).parent_path() / p).string()
                << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "heisenlab: " << e.what() << '\n';
    return kExitUsage;
  }
}
