#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tdqmc/ensemble.hpp"
#include "tdqmc/field2d.hpp"

namespace tdqmc {

/// One recorded step. Measures a solver does not produce stay empty.
struct Record {
  double t = 0.0;
  double field = 0.0;
  double ion_proj = 0.0;
  std::optional<double> ion_walk_latched;
  std::optional<double> ion_walk_inst;
  std::optional<double> ion_region;
  std::optional<double> energy;
  double dipole = 0.0;
  double absorbed_norm = 0.0;
  std::uint64_t node_events = 0;
};

/// Per-step records shared by all three solvers. Times strictly increase and
/// every ionization value lies in [0, 1].
class TimeSeries {
 public:
  static const std::vector<std::string>& columns();

  void append(const Record& r);
  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const Record& back() const { return records_.back(); }

  std::string to_csv() const;
  static TimeSeries from_csv(const std::string& text);

 private:
  std::vector<Record> records_;
};

/// 1 - mean_{i,k} |<phi_i^k(0)|phi_i^k(t)>|^2, clamped to [0, 1]. Norm lost
/// to the absorber lowers the overlaps and so counts as ionized.
double ionization_projection_engine(const GuidingWaveSet& now, const GuidingWaveSet& reference);

/// Per-electron survival for a single orbital: 1 - |<phi0|phi>|^2.
double ionization_projection_orbital(const WaveField& now, const WaveField& ground);

/// Exact-solver analog of the per-electron measure: 1 - |<Psi0|Psi(t)>|.
/// For Psi = phi x phi this equals 1 - |<phi0|phi>|^2.
double ionization_projection_exact(const Field2D& now, const Field2D& ground);

/// Two-electron ground-state survival |<Psi0|Psi(t)>|^2.
double two_electron_survival(const Field2D& now, const Field2D& ground);

/// Instantaneous fraction of the 2M walker coordinates with |x| > radius.
double ionization_walker_count(const WalkerEnsemble& ensemble, double radius = 10.0);

/// First-passage walker counting: a coordinate that once exceeds the radius
/// stays ionized.
class WalkerIonizationLatch {
 public:
  explicit WalkerIonizationLatch(std::size_t walkers, double radius = 10.0);

  /// Updates the latch and returns the latched fraction.
  double update(const WalkerEnsemble& ensemble);
  double fraction() const;

 private:
  double radius_;
  std::array<std::vector<bool>, kElectrons> flags_;
  std::size_t count_ = 0;
};

/// 1/2 [Pr(|x1| > r) + Pr(|x2| > r)] + absorbed norm, clamped to [0, 1].
double ionization_region_exact(const Field2D& state, double radius = 10.0);

/// Pr(|x_1| > r) and Pr(|x_2| > r) from the |Psi|^2 marginals.
std::array<double, 2> exceedance_marginals(const Field2D& state, double radius = 10.0);

/// <x1> + <x2>
double dipole(const Field2D& state);

/// (1/M) sum_k sum_i <phi_i^k|x|phi_i^k>
double dipole(const GuidingWaveSet& waves);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomically(const std::filesystem::path& path, const std::string& content);

}  // namespace tdqmc
