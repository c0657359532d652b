#include "tdqmc/engine.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "tdqmc/effective_potential.hpp"
#include "tdqmc/error.hpp"

namespace tdqmc {

namespace {

struct Sample {
  complex value;
  complex derivative;
};

// Linear interpolation of the wave and of its centered difference (zero at
// the two boundary points).
Sample sample_wave(const WaveField& w, double x) {
  const auto a = w.amplitudes();
  const std::size_t n = a.size();
  const Grid1D& g = w.grid();
  const double t = g.coordinate(x);
  const std::size_t j = static_cast<std::size_t>(std::clamp(std::floor(t), 0.0, static_cast<double>(n - 2)));
  const double fr = t - static_cast<double>(j);
  const double inv2dx = 0.5 / g.dx();
  auto deriv = [&](std::size_t i) { return (i == 0 || i + 1 == n) ? complex(0.0) : (a[i + 1] - a[i - 1]) * inv2dx; };
  return {a[j] * (1.0 - fr) + a[j + 1] * fr, deriv(j) * (1.0 - fr) + deriv(j + 1) * fr};
}

double clamp_to_box(double x, const Grid1D& box) { return std::clamp(x, box.x_min(), box.x_max()); }

struct LogGradient {
  double density;
  bool node;
  std::array<double, 2> drift;  // Re[d_i Psi / Psi]
};

LogGradient log_gradient(const WaveField& phi1, const WaveField& phi2, double x1, double x2, double eps) {
  const PairAmplitude p = pair_amplitude(phi1, phi2, x1, x2);
  LogGradient out{std::norm(p.value), false, {0.0, 0.0}};
  if (out.density < eps) {
    out.node = true;
    return out;
  }
  for (std::size_t i = 0; i < 2; ++i) out.drift[i] = (p.gradient[i] / p.value).real();
  return out;
}

}  // namespace

std::string to_string(RegimeKind k) {
  switch (k) {
    case RegimeKind::ultra_correlated:
      return "ultra_correlated";
    case RegimeKind::effective:
      return "effective";
    case RegimeKind::mean_field:
      return "mean_field";
  }
  return "?";
}

RegimeKind regime_from_string(const std::string& s) {
  if (s == "ultra_correlated" || s == "uc") return RegimeKind::ultra_correlated;
  if (s == "effective") return RegimeKind::effective;
  if (s == "mean_field" || s == "hartree") return RegimeKind::mean_field;
  throw ConfigError("unknown regime '" + s + "' (expected ultra_correlated, effective or mean_field)");
}

std::vector<double> CorrelationRegime::bandwidths(std::span<const double> positions) const {
  switch (kind) {
    case RegimeKind::ultra_correlated:
      return std::vector<double>(positions.size(), kPairwiseBandwidth);
    case RegimeKind::mean_field:
      return std::vector<double>(positions.size(), kMeanFieldBandwidth);
    case RegimeKind::effective:
      break;
  }
  return bandwidths_for(bandwidth, positions);
}

std::string to_string(Thermalization t) { return t == Thermalization::metropolis ? "metropolis" : "plain"; }

Thermalization thermalization_from_string(const std::string& s) {
  if (s == "metropolis") return Thermalization::metropolis;
  if (s == "plain") return Thermalization::plain;
  throw ConfigError("unknown thermalization '" + s + "' (expected metropolis or plain)");
}

void EngineConfig::validate() const {
  potentials.validate();
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(rotation_angle > 0.0 && rotation_angle <= 1.5707963267948966))
    throw ConfigError("rotation_angle must lie in (0, pi/2] for relaxation");
  if (walkers < 2) throw ConfigError("at least 2 walkers are required");
  if (!(sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
  if (!(noise_a0 >= 0.0)) throw ConfigError("noise amplitude must be non-negative");
  if (!(realtime_noise >= 0.0)) throw ConfigError("real-time noise must be non-negative");
  if (!(v_max > 0.0)) throw ConfigError("v_max must be positive");
  if (!(node_epsilon >= 0.0)) throw ConfigError("node epsilon must be non-negative");
  if (potential_refresh_every == 0) throw ConfigError("potential_refresh_every must be at least 1");
  if (!(absorber_fraction > 0.0 && absorber_fraction < 1.0)) throw ConfigError("absorber fraction must be in (0, 1)");
}

double EngineConfig::noise_amplitude(std::size_t step) const {
  const std::size_t n = decay_steps();
  if (n == 0) return 0.0;
  return noise_a0 * std::max(0.0, 1.0 - static_cast<double>(step) / static_cast<double>(n));
}

EngineState init(const EngineConfig& config) {
  config.validate();
  const double s0 = config.sigma0;
  const WaveField g = normalize(WaveField::from_function(config.grid, [s0](double x) { return std::exp(-x * x / (s0 * s0)); }));
  EngineState st{{}, {config.grid, {}}};
  const CounterRng rng(config.seed);
  for (std::size_t i = 0; i < kElectrons; ++i) {
    st.waves.waves[i].assign(config.walkers, g);
    auto& xs = st.ensemble.positions[i];
    xs.resize(config.walkers);
    for (std::size_t k = 0; k < config.walkers; ++k) {
      xs[k] = clamp_to_box(0.5 * s0 * rng.normal(stream_id(StreamPurpose::init, k, i), 0), config.grid);
    }
  }
  return st;
}

PairAmplitude pair_amplitude(const WaveField& phi1, const WaveField& phi2, double x1, double x2) {
  const Sample a1 = sample_wave(phi1, x1);
  const Sample a2 = sample_wave(phi2, x2);
  const Sample b1 = sample_wave(phi1, x2);
  const Sample b2 = sample_wave(phi2, x1);
  return {a1.value * a2.value + b1.value * b2.value,
          {a1.derivative * a2.value + b1.value * b2.derivative, a1.value * a2.derivative + b1.derivative * b2.value}};
}

Velocity guidance_velocity(std::size_t k, std::size_t electron, const GuidingWaveSet& waves,
                           const WalkerEnsemble& ensemble, double v_max, double node_epsilon) {
  if (electron >= kElectrons) throw ConfigError("electron index out of range");
  if (k >= waves.size() || k >= ensemble.size()) throw ConfigError("walker index out of range");
  const PairAmplitude p = pair_amplitude(waves.waves[0][k], waves.waves[1][k], ensemble.positions[0][k],
                                         ensemble.positions[1][k]);
  Velocity v;
  if (std::norm(p.value) < node_epsilon) {
    v.node = true;
    return v;
  }
  v.value = (p.gradient[electron] / p.value).imag();
  if (std::abs(v.value) > v_max) {
    v.clamped = true;
    v.value = std::copysign(v_max, v.value);
  }
  return v;
}

WalkerEnsemble drift_step(WalkerEnsemble ensemble, const VelocityField& velocities, double dt,
                          double noise_amplitude, const CounterRng& rng, std::uint64_t step, const Grid1D& box) {
  if (!(noise_amplitude >= 0.0)) throw ConfigError("noise amplitude must be non-negative");
  const double scale = std::sqrt(dt) * noise_amplitude;
  for (std::size_t i = 0; i < kElectrons; ++i) {
    auto& xs = ensemble.positions[i];
    if (velocities[i].size() != xs.size()) throw ConfigError("velocity field does not match the ensemble");
    for (std::size_t k = 0; k < xs.size(); ++k) {
      double x = xs[k] + velocities[i][k] * dt;
      if (noise_amplitude > 0.0) x += scale * rng.normal(stream_id(StreamPurpose::drift, k, i), step);
      xs[k] = clamp_to_box(x, box);
    }
  }
  return ensemble;
}

ThermalizationStats thermalize(WalkerEnsemble& ensemble, const GuidingWaveSet& waves, double amplitude, double dt,
                               const CounterRng& rng, std::uint64_t step, double node_epsilon) {
  ThermalizationStats stats;
  if (amplitude <= 0.0) return stats;
  const double diff = amplitude * amplitude * dt;
  const double scale = amplitude * std::sqrt(dt);
  const Grid1D& box = waves.grid;
  auto& p1 = ensemble.positions[0];
  auto& p2 = ensemble.positions[1];
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    const WaveField& f1 = waves.waves[0][k];
    const WaveField& f2 = waves.waves[1][k];
    const LogGradient here = log_gradient(f1, f2, p1[k], p2[k], node_epsilon);
    const std::array<double, 2> from{p1[k], p2[k]};
    std::array<double, 2> to{};
    for (std::size_t i = 0; i < 2; ++i) {
      to[i] = from[i] + diff * here.drift[i] + scale * rng.normal(stream_id(StreamPurpose::proposal, k, i), step);
    }
    ++stats.proposed;
    if (to[0] < box.x_min() || to[0] > box.x_max() || to[1] < box.x_min() || to[1] > box.x_max()) continue;
    const LogGradient there = log_gradient(f1, f2, to[0], to[1], node_epsilon);
    if (there.node) continue;
    double forward = 0.0;
    double backward = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      const double f = to[i] - from[i] - diff * here.drift[i];
      const double b = from[i] - to[i] - diff * there.drift[i];
      forward += f * f;
      backward += b * b;
    }
    const double log_ratio = std::log(there.density) - std::log(std::max(here.density, 1e-300)) +
                             (forward - backward) / (2.0 * diff);
    if (std::log(rng.uniform(stream_id(StreamPurpose::accept, k, 2), step)) < log_ratio) {
      p1[k] = to[0];
      p2[k] = to[1];
      ++stats.accepted;
    }
  }
  return stats;
}

double energy_estimate(const GuidingWaveSet& waves, const WalkerEnsemble& ensemble, std::span<const double> one_body,
                       const std::function<double(double)>& pair, bool require_normalized) {
  const std::size_t m = waves.size();
  if (m == 0 || ensemble.size() != m) throw ConfigError("energy estimate needs matching non-empty waves and walkers");
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double e = 0.0;
    for (std::size_t i = 0; i < kElectrons; ++i) {
      const WaveField& w = waves.waves[i][k];
      const double n2 = norm_squared(w);
      if (require_normalized && std::abs(n2 - 1.0) > 1e-6) {
        throw NumericalError("energy estimate on an unnormalized wave (norm^2 = " + std::to_string(n2) + ")");
      }
      if (!(n2 > 0.0)) throw DegenerateStateError("energy estimate on a zero wave");
      e += (kinetic_expectation(w) + expectation(w, one_body)) / (require_normalized ? 1.0 : n2);
    }
    total += e + pair(ensemble.positions[0][k] - ensemble.positions[1][k]);
  }
  return total / static_cast<double>(m);
}

double energy_estimate(const GuidingWaveSet& waves, const WalkerEnsemble& ensemble, const SoftCoreParams& params) {
  const auto ven = sample_v_en(waves.grid, params);
  return energy_estimate(waves, ensemble, ven, [&params](double d) { return v_ee(d, params); });
}

double EngineCounters::node_rate() const {
  return velocity_evaluations ? static_cast<double>(node_events) / static_cast<double>(velocity_evaluations) : 0.0;
}

double EngineCounters::clamp_rate() const {
  return velocity_evaluations ? static_cast<double>(clamp_events) / static_cast<double>(velocity_evaluations) : 0.0;
}

double EngineCounters::acceptance_rate() const {
  return proposals ? static_cast<double>(acceptances) / static_cast<double>(proposals) : 0.0;
}

Engine::Engine(EngineConfig config, CorrelationRegime regime)
    : Engine(config, regime, init(config)) {}

Engine::Engine(EngineConfig config, CorrelationRegime regime, EngineState state)
    : config_(std::move(config)),
      regime_(regime),
      state_(std::move(state)),
      reference_(state_.waves),
      rng_(config_.seed),
      v_en_(sample_v_en(config_.grid, config_.potentials)),
      x_(config_.grid.points()),
      absorber_(config_.grid, config_.absorber_fraction) {
  config_.validate();
  if (regime_.kind == RegimeKind::effective) regime_.bandwidth.validate();
  if (!(state_.waves.grid == config_.grid)) throw ConfigError("engine state grid differs from the configured grid");
  if (state_.ensemble.size() != state_.waves.size() || state_.ensemble.size() < 2)
    throw ConfigError("engine state needs matching walkers and waves (at least 2)");
  for (std::size_t i = 0; i < kElectrons; ++i) {
    if (state_.waves.waves[i].size() != state_.waves.size() ||
        state_.ensemble.positions[i].size() != state_.ensemble.size())
      throw ConfigError("engine state electrons differ in walker count");
  }
  refresh_bandwidths();
}

void Engine::refresh_bandwidths() {
  for (std::size_t i = 0; i < kElectrons; ++i) bandwidths_[i] = regime_.bandwidths(state_.ensemble.positions[i]);
}

void Engine::rebuild_potentials(std::uint64_t snapshot) {
  // waves of electron i feel the walkers of electron 1 - i
  for (std::size_t i = 0; i < kElectrons; ++i) {
    const std::size_t o = 1 - i;
    auto table = v_eff_batch(config_.grid, state_.ensemble.positions[o], bandwidths_[o], config_.potentials, snapshot);
    potentials_[i].assign(table.curve(0).begin(), table.curve(0).end());
    if (regime_.kind != RegimeKind::mean_field) {
      const std::size_t g = config_.grid.size();
      potentials_[i].resize(table.walkers() * g);
      for (std::size_t k = 1; k < table.walkers(); ++k) {
        const auto c = table.curve(k);
        std::copy(c.begin(), c.end(), potentials_[i].begin() + static_cast<std::ptrdiff_t>(k * g));
      }
    }
  }
}

void Engine::step_waves(complex delta, double field_value, bool renormalize, bool absorb) {
  const std::size_t g = config_.grid.size();
  const std::size_t m = state_.waves.size();
  const bool shared = regime_.kind == RegimeKind::mean_field;
  const std::size_t curves = shared ? 1 : m;
  std::vector<double> one_body(curves * g);
  std::vector<std::span<complex>> amps(m);
  std::vector<std::span<const double>> pots(m);
  for (std::size_t i = 0; i < kElectrons; ++i) {
    for (std::size_t k = 0; k < curves; ++k) {
      const double* ee = potentials_[i].data() + k * g;
      double* out = one_body.data() + k * g;
      for (std::size_t j = 0; j < g; ++j) out[j] = v_en_[j] + ee[j] - x_[j] * field_value;
    }
    auto& waves = state_.waves.waves[i];
    for (std::size_t k = 0; k < m; ++k) {
      amps[k] = waves[k].amplitudes();
      pots[k] = {one_body.data() + (shared ? 0 : k * g), g};
    }
    cn_step_batch(amps, pots, config_.grid.dx(), delta);
    for (std::size_t k = 0; k < m; ++k) {
      if (absorb) absorber_.apply(waves[k].amplitudes());
      if (renormalize) waves[k] = normalize(std::move(waves[k]));
    }
  }
}

VelocityField Engine::velocities() {
  const std::size_t m = state_.ensemble.size();
  VelocityField v;
  std::array<std::vector<unsigned char>, kElectrons> node, clamp;
  for (std::size_t i = 0; i < kElectrons; ++i) {
    v[i].resize(m);
    node[i].assign(m, 0);
    clamp[i].assign(m, 0);
  }
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < kElectrons; ++i) {
      const Velocity u =
          guidance_velocity(k, i, state_.waves, state_.ensemble, config_.v_max, config_.node_epsilon);
      v[i][k] = u.value;
      node[i][k] = u.node;
      clamp[i][k] = u.clamped;
    }
  }
  for (std::size_t i = 0; i < kElectrons; ++i) {
    counters_.velocity_evaluations += m;
    for (std::size_t k = 0; k < m; ++k) {
      counters_.node_events += node[i][k];
      counters_.clamp_events += clamp[i][k];
    }
  }
  return v;
}

double Engine::energy() const {
  const auto& p = config_.potentials;
  return energy_estimate(state_.waves, state_.ensemble, v_en_, [&p](double d) { return v_ee(d, p); }, false);
}

RelaxationResult Engine::relax(std::size_t trace_every) {
  const StepSpec spec{config_.dt, config_.rotation_angle};
  const complex delta = spec.delta();
  const std::size_t n = config_.n_relax_steps;
  RelaxationResult out;
  for (std::size_t s = 0; s < n; ++s) {
    if (regime_.adaptive() && s % regime_.bandwidth.refresh_every == 0) refresh_bandwidths();
    if (s % config_.potential_refresh_every == 0) rebuild_potentials(snapshot_++);
    step_waves(delta, 0.0, true, false);

    const VelocityField v = velocities();
    const double amp = config_.noise_amplitude(s);
    if (config_.thermalization == Thermalization::plain) {
      state_.ensemble = drift_step(std::move(state_.ensemble), v, config_.dt, amp, rng_, step_count_, config_.grid);
    } else {
      state_.ensemble = drift_step(std::move(state_.ensemble), v, config_.dt, 0.0, rng_, step_count_, config_.grid);
      const auto st = thermalize(state_.ensemble, state_.waves, amp, config_.dt, rng_, step_count_,
                                 config_.node_epsilon);
      counters_.proposals += st.proposed;
      counters_.acceptances += st.accepted;
    }
    ++step_count_;

    const bool last = s + 1 == n;
    if (last || (trace_every && (s + 1) % trace_every == 0)) {
      const double e = energy();
      out.energy_trace.emplace_back(s + 1, e);
      if (2 * (s + 1) >= n && !(e <= 0.0)) {
        throw ConvergenceError("relaxation diverged: energy " + std::to_string(e) + " a.u. at step " +
                               std::to_string(s + 1) + " of " + std::to_string(n));
      }
    }
  }
  if (regime_.adaptive()) refresh_bandwidths();
  out.energy = n ? out.energy_trace.back().second : energy();
  reference_ = state_.waves;
  return out;
}

void Engine::step_realtime(double t, const PulseSpec& pulse) {
  if (regime_.adaptive() && step_count_ % regime_.bandwidth.refresh_every == 0) refresh_bandwidths();
  if (step_count_ % config_.potential_refresh_every == 0 || potentials_[0].empty()) rebuild_potentials(snapshot_++);
  step_waves(complex(config_.dt, 0.0), field(t + 0.5 * config_.dt, pulse), false, config_.absorber);
  const VelocityField v = velocities();
  state_.ensemble =
      drift_step(std::move(state_.ensemble), v, config_.dt, config_.realtime_noise, rng_, step_count_, config_.grid);
  ++step_count_;
}

TimeSeries Engine::propagate(const PulseSpec& pulse, std::size_t n_steps, std::size_t record_every,
                             std::size_t energy_every) {
  pulse.validate();
  if (record_every == 0) throw ConfigError("record_every must be at least 1");
  TimeSeries ts;
  WalkerIonizationLatch latch(state_.ensemble.size());
  const std::uint64_t nodes_before = counters_.node_events;
  const std::uint64_t evals_before = counters_.velocity_evaluations;
  // the real-time loop needs fresh potentials on its first step
  potentials_[0].clear();

  auto record = [&](std::size_t s) {
    Record r;
    r.t = static_cast<double>(s) * config_.dt;
    r.field = field(r.t, pulse);
    r.ion_proj = ionization_projection_engine(state_.waves, reference_);
    r.ion_walk_latched = latch.update(state_.ensemble);
    r.ion_walk_inst = ionization_walker_count(state_.ensemble);
    if (energy_every && (s % energy_every == 0 || s == n_steps)) r.energy = energy();
    r.dipole = dipole(state_.waves);
    double norm = 0.0;
    for (const auto& ws : state_.waves.waves)
      for (const auto& w : ws) norm += norm_squared(w);
    r.absorbed_norm = std::max(0.0, 1.0 - norm / static_cast<double>(kElectrons * state_.waves.size()));
    r.node_events = counters_.node_events - nodes_before;
    ts.append(r);
  };

  record(0);
  for (std::size_t s = 0; s < n_steps; ++s) {
    step_realtime(static_cast<double>(s) * config_.dt, pulse);
    if ((s + 1) % record_every == 0 || s + 1 == n_steps) {
      record(s + 1);
    } else {
      latch.update(state_.ensemble);
    }
  }
  const std::uint64_t evals = counters_.velocity_evaluations - evals_before;
  if (evals && static_cast<double>(counters_.node_events - nodes_before) > 0.1 * static_cast<double>(evals)) {
    std::cerr << "warning: node-proximity events on more than 10% of walker-steps ("
              << counters_.node_events - nodes_before << " of " << evals << ")\n";
  }
  return ts;
}

GroundState relax_ground_state(const EngineConfig& config, const CorrelationRegime& regime) {
  Engine engine(config, regime);
  const auto result = engine.relax();
  return {engine.state(), engine.reference(), result.energy, engine.counters(),
          {std::vector<double>(engine.bandwidths(0).begin(), engine.bandwidths(0).end()),
           std::vector<double>(engine.bandwidths(1).begin(), engine.bandwidths(1).end())}};
}

TimeSeries propagate_realtime(const GroundState& ground, const EngineConfig& config, const CorrelationRegime& regime,
                              const PulseSpec& pulse, std::size_t n_steps, std::size_t record_every) {
  Engine engine(config, regime, ground.state);
  engine.set_reference(ground.reference);
  return engine.propagate(pulse, n_steps, record_every);
}

std::size_t pulse_steps(const PulseSpec& pulse, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  return static_cast<std::size_t>(std::ceil(pulse.duration() / dt - 1e-9));
}

}  // namespace tdqmc
