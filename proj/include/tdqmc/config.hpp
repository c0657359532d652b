#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdqmc/engine.hpp"
#include "tdqmc/potentials.hpp"
#include "tdqmc/reference.hpp"

namespace tdqmc {

enum class SolverKind { tdqmc, exact, tdhf };

std::string to_string(SolverKind s);
SolverKind solver_from_string(const std::string& s);

/// Everything one CLI invocation needs. Defaults reproduce the production
/// helium setup.
struct RunConfig {
  SolverKind solver = SolverKind::tdqmc;
  RegimeKind regime = RegimeKind::effective;
  std::uint64_t seed = 1;

  double x_min = -25.0;
  double x_max = 25.0;
  std::size_t points = 512;

  SoftCoreParams potentials;
  EngineConfig engine;       ///< grid, potentials and seed are overwritten from the fields above
  BandwidthSpec bandwidth;
  PulseSpec pulse;
  GroundStateOptions ground;  ///< exact / Hartree relaxation

  std::filesystem::path out_dir = "out";
  std::size_t record_every = 5;
  std::size_t energy_every = 50;
  bool write_bandwidths = true;

  std::vector<double> sweep_sigmas = {0.5, 1.0, 2.0, 5.0, 10.0};

  Grid1D grid() const { return Grid1D(x_min, x_max, points); }
  CorrelationRegime correlation() const;
  /// engine with grid, potentials and seed filled in
  EngineConfig resolved_engine() const;
  PropagationOptions propagation() const;

  /// Throws ConfigError on any invalid combination.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Parses the sectioned key = value format. `source` names the input in
/// error messages, which carry the offending line number.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// The default configuration written out in the same format.
std::string default_config_text();

}  // namespace tdqmc
