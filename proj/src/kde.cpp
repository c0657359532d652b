#include "tdqmc/kde.hpp"

#include <cmath>
#include <iostream>
#include <numbers>

#include "tdqmc/error.hpp"

namespace tdqmc {

std::string to_string(BandwidthMode m) { return m == BandwidthMode::global ? "global" : "adaptive"; }

BandwidthMode bandwidth_mode_from_string(const std::string& s) {
  if (s == "global") return BandwidthMode::global;
  if (s == "adaptive") return BandwidthMode::adaptive;
  throw ConfigError("unknown bandwidth mode '" + s + "' (expected global or adaptive)");
}

void BandwidthSpec::validate() const {
  if (!(sigma > 0.0)) throw ConfigError("bandwidth sigma must be positive");
  if (refresh_every < 1) throw ConfigError("bandwidth refresh_every must be >= 1");
}

std::vector<double> pilot_density(std::span<const double> positions, double sigma) {
  if (positions.empty()) throw ConfigError("pilot density of an empty ensemble");
  if (!(sigma > 0.0)) throw ConfigError("pilot bandwidth must be positive");
  const std::size_t m = positions.size();
  const double inv_s2 = 1.0 / (sigma * sigma);
  std::vector<double> rho(m);
  for (std::size_t k = 0; k < m; ++k) {
    double s = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      const double d = positions[k] - positions[l];
      s += std::exp(-d * d * inv_s2);
    }
    rho[k] = s;
  }
  const double norm = 1.0 / (static_cast<double>(m) * sigma * std::sqrt(std::numbers::pi));
  for (auto& r : rho) r *= norm;
  return rho;
}

std::vector<double> adaptive_bandwidths(std::span<const double> positions, double sigma) {
  const auto rho = pilot_density(positions, sigma);
  double log_g = 0.0;
  for (double r : rho) log_g += std::log(r);
  log_g /= static_cast<double>(rho.size());
  std::vector<double> out(rho.size());
  for (std::size_t k = 0; k < rho.size(); ++k) {
    // rho_k >= 1/(M sigma sqrt(pi)) from the self term
    out[k] = sigma * std::exp(0.5 * (log_g - std::log(rho[k])));
  }
  return out;
}

std::vector<double> bandwidths_for(const BandwidthSpec& spec, std::span<const double> positions) {
  if (spec.mode == BandwidthMode::global) return std::vector<double>(positions.size(), spec.sigma);
  return adaptive_bandwidths(positions, spec.sigma);
}

SigmaScan variational_sigma(const RelaxationRunner& relax, std::span<const double> sigma_grid) {
  if (sigma_grid.empty()) throw ConfigError("sigma grid is empty");
  for (double s : sigma_grid) {
    if (!(s > 0.0)) throw ConfigError("sigma candidates must be positive");
  }
  SigmaScan scan;
  bool any = false;
  for (double s : sigma_grid) {
    SigmaCandidate c{s, std::nullopt, {}};
    try {
      c.energy = relax(s);
    } catch (const std::exception& e) {
      c.error = e.what();
      std::cerr << "warning: relaxation at sigma=" << s << " failed: " << e.what() << '\n';
    }
    if (c.energy) {
      const bool better = !any || *c.energy < scan.best_energy ||
                          (*c.energy == scan.best_energy && s < scan.best_sigma);
      if (better) {
        scan.best_sigma = s;
        scan.best_energy = *c.energy;
        any = true;
      }
    }
    scan.candidates.push_back(std::move(c));
  }
  if (!any) throw ConvergenceError("every sigma candidate failed to relax");
  return scan;
}

}  // namespace tdqmc
