// tdqmc: command-line front end for relaxation, laser runs, comparisons and
// bandwidth scans.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdqmc/config.hpp"
#include "tdqmc/error.hpp"
#include "tdqmc/runner.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string solver;
  std::string regime;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Override the master seed");
  cmd->add_option("--out", o.out, "Override the output directory");
  cmd->add_option("--solver", o.solver, "Override the solver (tdqmc, exact, tdhf)");
  cmd->add_option("--regime", o.regime, "Override the TDQMC regime (ultra_correlated, effective, mean_field)");
}

tdqmc::RunConfig resolve(const Overrides& o) {
  auto cfg = tdqmc::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.solver.empty()) cfg.solver = tdqmc::solver_from_string(o.solver);
  if (!o.regime.empty()) cfg.regime = tdqmc::regime_from_string(o.regime);
  cfg.validate();
  return cfg;
}

void report(const tdqmc::RunReport& r) {
  for (const auto& p : r.written) std::cout << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-dependent quantum Monte Carlo for 1D helium"};
  app.set_version_flag("--version", tdqmc::version());
  app.require_subcommand(1);

  Overrides o;
  std::vector<std::string> run_dirs;
  std::string compare_out = "compare";
  std::vector<double> sigmas;

  auto* relax = app.add_subcommand("relax", "Relax the ground state");
  add_common(relax, o);
  auto* propagate = app.add_subcommand("propagate", "Relax, then propagate through the pulse");
  add_common(propagate, o);
  auto* sweep = app.add_subcommand("sweep-sigma", "Scan the kernel width and pick the lowest energy");
  add_common(sweep, o);
  sweep->add_option("--sigmas", sigmas, "Kernel widths to scan (overrides [sweep] sigmas)")->delimiter(',');
  auto* compare = app.add_subcommand("compare", "Merge the time series of finished runs");
  compare->add_option("runs", run_dirs, "Run directories")->required()->expected(2, -1)->check(CLI::ExistingDirectory);
  compare->add_option("--out", compare_out, "Output directory");
  auto* dump = app.add_subcommand("default-config", "Print a starter config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*dump) {
      std::cout << tdqmc::default_config_text();
    } else if (*relax) {
      const auto r = tdqmc::run_relax(resolve(o));
      std::printf("energy %.6f a.u.\n", r.summary.at("energy").get<double>());
      report(r);
    } else if (*propagate) {
      const auto r = tdqmc::run_propagate(resolve(o));
      std::printf("final ionization (projection) %.6f after %zu steps\n",
                  r.summary.at("final").at("ion_proj").get<double>(), r.summary.at("steps").get<std::size_t>());
      report(r);
    } else if (*sweep) {
      const auto cfg = resolve(o);
      const auto r = tdqmc::run_sweep_sigma(cfg, sigmas.empty() ? std::nullopt : std::optional(sigmas));
      std::printf("selected sigma %.6g (energy %.6f a.u.)\n", r.summary.at("best_sigma").get<double>(),
                  r.summary.at("best_energy").get<double>());
      report(r);
    } else if (*compare) {
      std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
      const auto r = tdqmc::run_compare(dirs, compare_out);
      std::cout << tdqmc::format_compare_table(r.summary);
      report(r);
    }
  } catch (const tdqmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const tdqmc::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return 3;
  } catch (const tdqmc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
