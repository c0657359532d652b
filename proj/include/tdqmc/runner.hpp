#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdqmc/config.hpp"

namespace tdqmc {

/// Summary JSON of a finished command and the files it wrote.
struct RunReport {
  nlohmann::json summary;
  std::vector<std::filesystem::path> written;
};

/// Ground-state relaxation for the configured solver. Writes summary.json
/// and, for TDQMC, bandwidths.csv.
RunReport run_relax(const RunConfig& config);

/// In-run relaxation followed by the pulse. Writes timeseries.csv and
/// summary.json.
RunReport run_propagate(const RunConfig& config);

/// Aligns the time series of completed run directories on t and writes
/// merged_compare.csv and compare_summary.json into `out_dir`.
RunReport run_compare(const std::vector<std::filesystem::path>& run_dirs, const std::filesystem::path& out_dir);

/// Effective-regime relaxations over a sigma grid; writes sigma_scan.csv and
/// summary.json with the selected sigma.
RunReport run_sweep_sigma(const RunConfig& config, const std::optional<std::vector<double>>& sigmas = std::nullopt);

/// Text table of a compare summary, one row per run.
std::string format_compare_table(const nlohmann::json& summary);

std::string version();

}  // namespace tdqmc
