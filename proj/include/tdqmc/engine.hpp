#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tdqmc/ensemble.hpp"
#include "tdqmc/kde.hpp"
#include "tdqmc/observables.hpp"
#include "tdqmc/potentials.hpp"
#include "tdqmc/propagator.hpp"
#include "tdqmc/random.hpp"

namespace tdqmc {

enum class RegimeKind { ultra_correlated, effective, mean_field };

std::string to_string(RegimeKind k);
RegimeKind regime_from_string(const std::string& s);

/// How the walker waves see the other electron: bare pairwise coupling,
/// Gaussian-smeared effective coupling, or the walker-averaged mean field.
struct CorrelationRegime {
  RegimeKind kind = RegimeKind::effective;
  BandwidthSpec bandwidth;

  static CorrelationRegime ultra_correlated() { return {RegimeKind::ultra_correlated, {}}; }
  static CorrelationRegime mean_field() { return {RegimeKind::mean_field, {}}; }
  static CorrelationRegime effective(BandwidthSpec b) { return {RegimeKind::effective, b}; }

  /// Kernel widths for the walkers at `positions` (sentinels for the limits).
  std::vector<double> bandwidths(std::span<const double> positions) const;
  bool adaptive() const { return kind == RegimeKind::effective && bandwidth.mode == BandwidthMode::adaptive; }
};

/// Walker moves during relaxation. `metropolis` targets |Psi^k|^2 with a
/// Langevin proposal and accept/reject; `plain` adds unadjusted Gaussian
/// noise to the guidance step.
enum class Thermalization { metropolis, plain };

std::string to_string(Thermalization t);
Thermalization thermalization_from_string(const std::string& s);

struct EngineConfig {
  Grid1D grid = Grid1D::production();
  SoftCoreParams potentials;
  double dt = 0.1;
  std::size_t n_relax_steps = 400;
  double rotation_angle = 0.7853981633974483;  // pi/4
  std::size_t walkers = 2000;
  double sigma0 = 0.5;
  double noise_a0 = 1.0;
  std::size_t noise_decay_steps = 0;  ///< 0: n_relax_steps / 2
  double realtime_noise = 0.0;
  Thermalization thermalization = Thermalization::metropolis;
  double v_max = 20.0;
  double node_epsilon = 1e-12;
  std::size_t potential_refresh_every = 1;
  bool absorber = true;
  double absorber_fraction = 0.8;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t decay_steps() const { return noise_decay_steps ? noise_decay_steps : n_relax_steps / 2; }
  /// a0 * max(0, 1 - step / n_decay)
  double noise_amplitude(std::size_t step) const;
};

struct EngineState {
  WalkerEnsemble ensemble;
  GuidingWaveSet waves;
};

/// Normalized Gaussians exp(-x^2/sigma0^2) for every wave; walker positions
/// drawn from |phi|^2 (normal with standard deviation sigma0/2).
EngineState init(const EngineConfig& config);

/// Psi^k and its gradient at (x1, x2) for the symmetrized product
/// Psi^k = phi_1^k(x1) phi_2^k(x2) + phi_1^k(x2) phi_2^k(x1). Values and
/// derivatives use linear interpolation of grid values and of centered
/// differences.
struct PairAmplitude {
  complex value;
  std::array<complex, 2> gradient;
};

PairAmplitude pair_amplitude(const WaveField& phi1, const WaveField& phi2, double x1, double x2);

struct Velocity {
  double value = 0.0;
  bool node = false;     ///< |Psi|^2 below the node threshold; value forced to 0
  bool clamped = false;  ///< |v| exceeded v_max
};

/// Bohmian velocity Im[d_i Psi^k / Psi^k] at the pair's walker positions.
Velocity guidance_velocity(std::size_t k, std::size_t electron, const GuidingWaveSet& waves,
                           const WalkerEnsemble& ensemble, double v_max = 20.0, double node_epsilon = 1e-12);

using VelocityField = std::array<std::vector<double>, kElectrons>;

/// x <- clamp(x + v dt + eta sqrt(dt) amplitude), eta from stream
/// (drift, walker, electron) at counter `step`.
WalkerEnsemble drift_step(WalkerEnsemble ensemble, const VelocityField& velocities, double dt,
                          double noise_amplitude, const CounterRng& rng, std::uint64_t step, const Grid1D& box);

struct ThermalizationStats {
  std::size_t proposed = 0;
  std::size_t accepted = 0;
};

/// One Metropolis-adjusted Langevin move per walker pair with target
/// |Psi^k|^2, diffusion amplitude^2 and drift amplitude^2 Re[grad Psi/Psi].
ThermalizationStats thermalize(WalkerEnsemble& ensemble, const GuidingWaveSet& waves, double amplitude, double dt,
                               const CounterRng& rng, std::uint64_t step, double node_epsilon = 1e-12);

/// E = (1/M) sum_k [ sum_i <phi_i^k| -1/2 d^2 + v_one |phi_i^k> + pair(x_1^k - x_2^k) ].
/// With require_normalized, a wave whose norm^2 deviates from 1 by more
/// than 1e-6 throws; otherwise expectation values are divided by norm^2.
double energy_estimate(const GuidingWaveSet& waves, const WalkerEnsemble& ensemble, std::span<const double> one_body,
                       const std::function<double(double)>& pair, bool require_normalized = true);

double energy_estimate(const GuidingWaveSet& waves, const WalkerEnsemble& ensemble, const SoftCoreParams& params);

struct EngineCounters {
  std::uint64_t velocity_evaluations = 0;
  std::uint64_t node_events = 0;
  std::uint64_t clamp_events = 0;
  std::uint64_t proposals = 0;
  std::uint64_t acceptances = 0;

  double node_rate() const;
  double clamp_rate() const;
  double acceptance_rate() const;
};

struct RelaxationResult {
  double energy = 0.0;
  std::vector<std::pair<std::size_t, double>> energy_trace;  ///< (step, energy)
};

/// Owns one walker/wave state and advances it under a regime.
class Engine {
 public:
  Engine(EngineConfig config, CorrelationRegime regime);
  Engine(EngineConfig config, CorrelationRegime regime, EngineState state);

  /// Complex-time relaxation of the waves with real-time walker motion.
  /// Stores the final waves as the projection reference.
  RelaxationResult relax(std::size_t trace_every = 50);

  /// One real-time step under `pulse` from time t to t + dt.
  void step_realtime(double t, const PulseSpec& pulse);

  /// Real-time run of n_steps; records t = 0 and every `record_every`-th
  /// step (plus the last), energy every `energy_every` steps.
  TimeSeries propagate(const PulseSpec& pulse, std::size_t n_steps, std::size_t record_every = 1,
                       std::size_t energy_every = 50);

  const EngineConfig& config() const { return config_; }
  const CorrelationRegime& regime() const { return regime_; }
  const EngineState& state() const { return state_; }
  const GuidingWaveSet& reference() const { return reference_; }
  const EngineCounters& counters() const { return counters_; }
  std::span<const double> bandwidths(std::size_t electron) const { return bandwidths_[electron]; }
  double energy() const;

  /// Replaces the projection reference (normally set by relax()).
  void set_reference(GuidingWaveSet reference) { reference_ = std::move(reference); }

 private:
  void refresh_bandwidths();
  void rebuild_potentials(std::uint64_t snapshot);
  void step_waves(complex delta, double field_value, bool renormalize, bool absorb);
  VelocityField velocities();

  EngineConfig config_;
  CorrelationRegime regime_;
  EngineState state_;
  GuidingWaveSet reference_;
  CounterRng rng_;
  std::vector<double> v_en_;
  std::vector<double> x_;
  Absorber absorber_;
  std::array<std::vector<double>, kElectrons> bandwidths_;
  // potentials_[i] is felt by the waves of electron i (built from electron 1-i)
  std::array<std::vector<double>, kElectrons> potentials_;
  EngineCounters counters_;
  std::uint64_t step_count_ = 0;
  std::uint64_t snapshot_ = 0;
};

/// Convenience wrappers around Engine.
struct GroundState {
  EngineState state;
  GuidingWaveSet reference;
  double energy = 0.0;
  EngineCounters counters;
  std::array<std::vector<double>, kElectrons> bandwidths;
};

GroundState relax_ground_state(const EngineConfig& config, const CorrelationRegime& regime);

TimeSeries propagate_realtime(const GroundState& ground, const EngineConfig& config, const CorrelationRegime& regime,
                              const PulseSpec& pulse, std::size_t n_steps, std::size_t record_every = 1);

/// ceil(pulse duration / dt)
std::size_t pulse_steps(const PulseSpec& pulse, double dt);

}  // namespace tdqmc
