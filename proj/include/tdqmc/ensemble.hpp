#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "tdqmc/grid.hpp"

namespace tdqmc {

inline constexpr std::size_t kElectrons = 2;

/// Walker coordinates x_i^k for electrons i = 0, 1 and walkers k = 0..M-1.
/// Walker k of electron 0 and walker k of electron 1 form pair k.
struct WalkerEnsemble {
  std::array<std::vector<double>, kElectrons> positions;

  std::size_t size() const { return positions[0].size(); }
};

/// One guiding wave per walker per electron, all on a shared grid.
struct GuidingWaveSet {
  Grid1D grid;
  std::array<std::vector<WaveField>, kElectrons> waves;

  std::size_t size() const { return waves[0].size(); }
};

}  // namespace tdqmc
