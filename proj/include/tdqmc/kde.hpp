#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tdqmc {

enum class BandwidthMode { global, adaptive };

std::string to_string(BandwidthMode m);
BandwidthMode bandwidth_mode_from_string(const std::string& s);

/// Kernel width of the walker-space Gaussians. In global mode every walker
/// uses `sigma`; in adaptive mode `sigma` is the pilot bandwidth and
/// per-walker widths are re-estimated every `refresh_every` steps.
struct BandwidthSpec {
  BandwidthMode mode = BandwidthMode::global;
  double sigma = 5.0;
  std::size_t refresh_every = 10;

  void validate() const;
};

/// Fixed-bandwidth Gaussian KDE evaluated at each walker:
/// rho_k = 1/(M sigma sqrt(pi)) sum_l exp(-(x_k - x_l)^2 / sigma^2).
std::vector<double> pilot_density(std::span<const double> positions, double sigma);

/// Abramson widths sigma_k = sigma sqrt(G / rho_k), G the geometric mean of
/// the pilot densities.
std::vector<double> adaptive_bandwidths(std::span<const double> positions, double sigma);

/// Per-walker widths for a spec; global mode ignores positions.
std::vector<double> bandwidths_for(const BandwidthSpec& spec, std::span<const double> positions);

struct SigmaCandidate {
  double sigma = 0.0;
  std::optional<double> energy;  ///< empty when the relaxation failed
  std::string error;
};

struct SigmaScan {
  std::vector<SigmaCandidate> candidates;
  double best_sigma = 0.0;
  double best_energy = 0.0;
};

/// Energy of a ground-state relaxation at a given pilot/global sigma.
using RelaxationRunner = std::function<double(double sigma)>;

/// Runs `relax` for each candidate and returns the minimum-energy one; ties
/// go to the smaller sigma. Candidates that throw are recorded and skipped.
SigmaScan variational_sigma(const RelaxationRunner& relax, std::span<const double> sigma_grid);

}  // namespace tdqmc
