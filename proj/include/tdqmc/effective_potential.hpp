#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "tdqmc/grid.hpp"
#include "tdqmc/potentials.hpp"

namespace tdqmc {

/// Kernel-width sentinels. A bandwidth of exactly 0 keeps only the walker's
/// own partner (pairwise interaction); +infinity weights every walker
/// equally (mean field). Any finite positive value interpolates.
inline constexpr double kPairwiseBandwidth = 0.0;
inline constexpr double kMeanFieldBandwidth = std::numeric_limits<double>::infinity();

/// Gaussian weight exp(-d^2/sigma^2) with the sentinel conventions above and
/// exponents below -700 flushed to zero. `self` marks the l == k term.
double kernel_weight(double d, double sigma, bool self);

/// Z_k = sum_l w_kl over the opposite-electron walkers. Always >= 1.
double weight_factor(std::size_t k, std::span<const double> positions, std::span<const double> bandwidths);

/// Effective e-e potential felt at x by the wave guiding walker k:
/// (1/Z_k) sum_l v_ee(x - x_l) w_kl. Direct O(M) evaluation.
double v_eff(double x, std::size_t k, std::span<const double> positions, std::span<const double> bandwidths,
             const SoftCoreParams& params = {});

/// All M effective-potential curves on a grid, row-major (walker, grid point).
class EffectivePotentialTable {
 public:
  EffectivePotentialTable(Grid1D grid, std::size_t walkers, std::vector<double> values,
                          std::vector<double> bandwidths, std::uint64_t snapshot_id);

  const Grid1D& grid() const { return grid_; }
  std::size_t walkers() const { return walkers_; }
  std::span<const double> curve(std::size_t k) const { return {values_.data() + k * grid_.size(), grid_.size()}; }
  double operator()(std::size_t k, std::size_t j) const { return values_[k * grid_.size() + j]; }
  std::span<const double> bandwidths() const { return bandwidths_; }
  std::uint64_t snapshot_id() const { return snapshot_id_; }

 private:
  Grid1D grid_;
  std::size_t walkers_;
  std::vector<double> values_;
  std::vector<double> bandwidths_;
  std::uint64_t snapshot_id_;
};

/// Batched evaluation of every curve. Sentinel-only snapshots take O(M G)
/// shortcuts; otherwise the weight matrix is applied to the pairwise
/// potential matrix as one dense product.
EffectivePotentialTable v_eff_batch(const Grid1D& grid, std::span<const double> positions,
                                    std::span<const double> bandwidths, const SoftCoreParams& params = {},
                                    std::uint64_t snapshot_id = 0);

}  // namespace tdqmc
