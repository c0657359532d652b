// Acceptance suite for the helium model. Prints one PASS/FAIL line per
// criterion on stdout (progress goes to stderr) and exits non-zero if any
// criterion fails. Full production settings: expect about 35 minutes on one core.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tdqmc/effective_potential.hpp"
#include "tdqmc/engine.hpp"
#include "tdqmc/kde.hpp"
#include "tdqmc/reference.hpp"

using namespace tdqmc;

namespace {

constexpr double kExactE0 = -2.4597;
constexpr double kHartreeE0 = -2.4522;
constexpr double kTdqmcE0 = -2.4595;
constexpr double kGap = 0.6117;
constexpr double kCoreSigma = 0.58;
constexpr std::size_t kGroundWalkers = 2000;
constexpr std::size_t kRealtimeWalkers = 1000;
constexpr std::array<std::uint64_t, 3> kSeeds = {1, 2, 3};
const std::vector<double> kPilotSigmas = {0.5, 1.0, 2.0, 5.0, 10.0};

const auto t_begin = std::chrono::steady_clock::now();
int failures = 0;

double elapsed() { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count(); }

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void note(const std::string& s) { std::fprintf(stderr, "[%7.1fs] %s\n", elapsed(), s.c_str()); }

void report(int id, bool pass, const std::string& what) {
  if (!pass) ++failures;
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
}

PulseSpec pulse(double omega, double e0) {
  PulseSpec p;
  p.omega = omega;
  p.e0 = e0;
  return p;
}

PropagationOptions sparse_records() {
  PropagationOptions o;
  o.record_every = 100;
  o.energy_every = 0;
  return o;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

struct TdqmcFinal {
  double proj = 0.0;
  double latched = 0.0;
};

TdqmcFinal run_tdqmc(const CorrelationRegime& regime, std::uint64_t seed, const PulseSpec& p) {
  EngineConfig c;
  c.walkers = kRealtimeWalkers;
  c.seed = seed;
  const auto g = relax_ground_state(c, regime);
  const auto ts = propagate_realtime(g, c, regime, p, pulse_steps(p, c.dt), 200);
  return {ts.back().ion_proj, ts.back().ion_walk_latched.value_or(NAN)};
}

// Criteria 1, 2 and (reported later) 4: reference energies.
struct References {
  ExactState exact;
  HartreeOrbital hartree;
  ExactGap gap;
  double gap_seconds = 0.0;
};

References reference_energies() {
  const auto grid = Grid1D::production();
  const SoftCoreParams p;

  auto t0 = elapsed();
  References r{exact_ground_state(grid, p), hartree_scf_ground(grid, p), {}, 0.0};
  const double t_exact = elapsed() - t0;
  report(1, std::abs(r.exact.energy - kExactE0) <= 0.002 && t_exact <= 600.0,
         fmt("exact E0 = %.6f a.u. (target %.4f +- 0.002), %zu steps, %.1f s", r.exact.energy, kExactE0, r.exact.steps,
             t_exact));
  report(2, std::abs(r.hartree.energy - kHartreeE0) <= 0.002,
         fmt("Hartree-Fock E0 = %.6f a.u. (target %.4f +- 0.002), %zu iterations", r.hartree.energy, kHartreeE0,
             r.hartree.iterations));
  t0 = elapsed();
  r.gap = exact_first_gap(r.exact, p);
  r.gap_seconds = elapsed() - t0;
  return r;
}

// Criteria 3 and 5: variational pilot bandwidth and the relaxed ensemble.
GroundState ground_state_scan(const References& ref) {
  EngineConfig c;
  c.walkers = kGroundWalkers;
  std::optional<GroundState> best;
  const auto scan = variational_sigma(
      [&](double sigma) {
        auto g = relax_ground_state(c, CorrelationRegime::effective({BandwidthMode::adaptive, sigma, 10}));
        note(fmt("adaptive pilot sigma %.3g: E = %.6f", sigma, g.energy));
        const double e = g.energy;
        if (!best || e < best->energy) best = std::move(g);
        return e;
      },
      kPilotSigmas);

  const double e = scan.best_energy;
  const bool ordered = ref.exact.energy <= e && e < ref.hartree.energy;
  report(3, std::abs(e - kTdqmcE0) <= 0.02 && ordered,
         fmt("effective-potential E0 = %.6f a.u. at pilot sigma %.3g, M = %zu (target %.4f +- 0.02); "
             "ordering %.6f <= %.6f < %.6f %s",
             e, scan.best_sigma, kGroundWalkers, kTdqmcE0, ref.exact.energy, e, ref.hartree.energy,
             ordered ? "holds" : "violated"));
  report(4, std::abs(ref.gap.gap - kGap) <= 0.01,
         fmt("E1 - E0 = %.6f a.u. (target %.4f +- 0.01; E1 = %.6f), %.1f s", ref.gap.gap, kGap, ref.gap.excited,
             ref.gap_seconds));

  double core_sum = 0.0, largest = 0.0;
  std::size_t core_n = 0;
  for (std::size_t i = 0; i < kElectrons; ++i) {
    const auto& xs = best->state.ensemble.positions[i];
    const auto& bw = best->bandwidths[i];
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (std::abs(xs[k]) < 0.5) {
        core_sum += bw[k];
        ++core_n;
      }
      largest = std::max(largest, bw[k]);
    }
  }
  const double core = core_n ? core_sum / static_cast<double>(core_n) : NAN;
  report(5, std::abs(core - kCoreSigma) <= 0.2 * kCoreSigma && largest > 10.0 * core,
         fmt("core (|x| < 0.5) bandwidth %.4f a.u. over %zu walkers (target %.2f +- 20%%); max %.3f = %.1fx core",
             core, core_n, kCoreSigma, largest, largest / core));

  // Width profile the same ensemble would get at each other pilot sigma.
  for (double sigma : kPilotSigmas) {
    double s = 0.0, mx = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < kElectrons; ++i) {
      const auto& xs = best->state.ensemble.positions[i];
      const auto bw = adaptive_bandwidths(xs, sigma);
      for (std::size_t k = 0; k < xs.size(); ++k) {
        if (std::abs(xs[k]) < 0.5) {
          s += bw[k];
          ++n;
        }
        mx = std::max(mx, bw[k]);
      }
    }
    note(fmt("pilot sigma %.3g on the relaxed ensemble: core %.4f, max %.3f = %.1fx core", sigma, s / n, mx,
             mx * n / s));
  }
  return std::move(*best);
}

// Criterion 6: sentinel limits and batch/direct agreement on a relaxed snapshot.
void regime_limits(const GroundState& g) {
  const auto grid = Grid1D::production();
  const auto& all = g.state.ensemble.positions[1];
  double sentinel_err = 0.0, mid_err = 0.0;
  for (std::size_t m = 1; m <= 64; ++m) {
    const std::vector<double> pos(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m));
    const auto pair = v_eff_batch(grid, pos, std::vector<double>(m, kPairwiseBandwidth));
    const auto mf = v_eff_batch(grid, pos, std::vector<double>(m, kMeanFieldBandwidth));
    for (std::size_t j = 0; j < grid.size(); ++j) {
      double avg = 0.0;
      for (double y : pos) avg += v_ee(grid.x(j) - y);
      avg /= static_cast<double>(m);
      for (std::size_t k = 0; k < m; ++k) {
        sentinel_err = std::max(sentinel_err, std::abs(pair(k, j) - v_ee(grid.x(j) - pos[k])));
        sentinel_err = std::max(sentinel_err, std::abs(mf(k, j) - avg));
      }
    }
    for (const auto& bw : {std::vector<double>(m, 0.5), std::vector<double>(m, 5.0), adaptive_bandwidths(pos, 1.0)}) {
      const auto t = v_eff_batch(grid, pos, bw);
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t j = 0; j < grid.size(); ++j)
          mid_err = std::max(mid_err, std::abs(t(k, j) - v_eff(grid.x(j), k, pos, bw)));
    }
  }
  report(6, sentinel_err <= 1e-10 && mid_err <= 1e-8,
         fmt("M = 1..64 relaxed snapshot: sentinel tables vs pairwise/mean-field max error %.2e (<= 1e-10); "
             "mid-sigma tables vs direct sum %.2e (<= 1e-8)",
             sentinel_err, mid_err));
}

// Criteria 7 and 9 share the low-frequency exact runs; 10 reuses one of them.
struct LowFrequency {
  std::array<double, 3> exact_proj{};  // e0 = 0.10, 0.15, 0.20
  double norm_defect = 0.0;
};

LowFrequency low_frequency(const References& ref) {
  const SoftCoreParams p;
  const auto opt = sparse_records();

  std::map<double, double> exact_final;
  std::optional<ExactRun> strong;
  for (double e0 : {0.10, 0.15, 0.20}) {
    const auto pu = pulse(0.136, e0);
    auto run = exact_propagate(ref.exact.psi, p, pu, pulse_steps(pu, 0.1), opt);
    exact_final[e0] = run.series.back().ion_proj;
    note(fmt("exact w=0.136 e0=%.2f: projection %.4f", e0, exact_final[e0]));
    if (e0 == 0.20) strong = std::move(run);
  }
  const auto pu = pulse(0.136, 0.20);
  const auto tdhf = tdhf_propagate(ref.hartree, p, pu, pulse_steps(pu, 0.1), opt);
  const double ex = exact_final[0.20];
  const double ex_region = *strong->series.back().ion_region;
  const double hf = tdhf.series.back().ion_proj;
  note(fmt("TDHF w=0.136 e0=0.20: projection %.4f", hf));

  std::vector<double> eff, uc;
  for (auto seed : kSeeds) {
    eff.push_back(run_tdqmc(CorrelationRegime::effective({BandwidthMode::global, 5.0, 10}), seed, pu).proj);
    note(fmt("TDQMC effective seed %llu: projection %.4f", static_cast<unsigned long long>(seed), eff.back()));
  }
  for (auto seed : kSeeds) {
    uc.push_back(run_tdqmc(CorrelationRegime::ultra_correlated(), seed, pu).latched);
    note(fmt("TDQMC ultra-correlated seed %llu: walker count %.4f", static_cast<unsigned long long>(seed), uc.back()));
  }
  const double eff_m = mean(eff), uc_m = mean(uc);
  const double rel_gap = (ex - hf) / ex;
  const bool pass = hf < ex && rel_gap >= 0.10 && std::abs(eff_m - ex) < std::abs(hf - ex) && uc_m > ex_region;
  report(7, pass,
         fmt("w=0.136 e0=0.20 final projection: exact %.4f, TDHF %.4f (%.1f%% lower, need >= 10%%), "
             "TDQMC effective %.4f (|d| %.4f vs TDHF %.4f); walker count: ultra-correlated %.4f vs exact region "
             "%.4f (all-absorbed-ionized variant %.4f); M = %zu, seeds 1-3",
             ex, hf, 100 * rel_gap, eff_m, std::abs(eff_m - ex), std::abs(hf - ex), uc_m, ex_region,
             strong->region_full_absorbed, kRealtimeWalkers));

  return {{exact_final[0.10], exact_final[0.15], exact_final[0.20]},
          std::abs(norm_squared(strong->final_state) + strong->series.back().absorbed_norm - 1.0)};
}

void intensity_order(const LowFrequency& low) {
  const auto [a, b, c] = low.exact_proj;
  report(9, a < b && b < c && a < 0.10,
         fmt("exact final projection at w=0.136: e0=0.10 -> %.4f, 0.15 -> %.4f, 0.20 -> %.4f (increasing, first < 0.10)",
             a, b, c));
}

// Criterion 8: high-frequency agreement.
void high_frequency(const References& ref) {
  const SoftCoreParams p;
  const auto pu = pulse(1.22, 0.30);
  const auto opt = sparse_records();
  const auto n = pulse_steps(pu, 0.1);
  const double ex = exact_propagate(ref.exact.psi, p, pu, n, opt).series.back().ion_proj;
  const double hf = tdhf_propagate(ref.hartree, p, pu, n, opt).series.back().ion_proj;
  std::vector<double> eff;
  for (auto seed : kSeeds) {
    eff.push_back(run_tdqmc(CorrelationRegime::effective({BandwidthMode::global, 5.0, 10}), seed, pu).proj);
    note(fmt("TDQMC effective w=1.22 seed %llu: projection %.4f", static_cast<unsigned long long>(seed), eff.back()));
  }
  const double q = mean(eff);
  const double spread = std::max({std::abs(ex - hf), std::abs(ex - q), std::abs(hf - q)});
  report(8, spread <= 0.05,
         fmt("w=1.22 e0=0.30 final projection: exact %.4f, TDHF %.4f, TDQMC effective %.4f; max pairwise gap %.4f "
             "(<= 0.05)",
             ex, hf, q, spread));
}

// Criterion 10: numerical hygiene.
void hygiene(double norm_defect) {
  std::vector<std::string> failed;
  const auto grid = Grid1D::production();
  const auto ven = sample_v_en(grid, {});
  auto packet = normalize(WaveField::from_function(grid, [](double x) {
    return std::exp(-(x - 1.0) * (x - 1.0)) * std::exp(complex(0.0, 0.8 * x));
  }));

  double unitarity = 0.0;
  {
    const auto pu = pulse(0.136, 0.2);
    auto w = packet;
    for (int s = 0; s < 200; ++s) {
      auto v = ven;
      for (std::size_t j = 0; j < v.size(); ++j) v[j] += v_ext(grid.x(j), 0.1 * s + 100.0, pu);
      const double before = norm_squared(w);
      w = cn_step(w, v, {0.1, 0.0});
      unitarity = std::max(unitarity, std::abs(norm_squared(w) - before) / before);
    }
  }
  if (unitarity > 1e-10) failed.push_back("unitarity");

  double reversal = 0.0;
  {
    CrankNicolsonOperator fwd(ven, grid.dx(), complex(0.1, 0.0)), bwd(ven, grid.dx(), complex(-0.1, 0.0));
    auto w = packet;
    std::vector<complex> scratch(grid.size());
    for (int s = 0; s < 100; ++s) fwd.apply(w.amplitudes(), scratch);
    for (int s = 0; s < 100; ++s) bwd.apply(w.amplitudes(), scratch);
    for (std::size_t j = 0; j < grid.size(); ++j) reversal = std::max(reversal, std::abs(w[j] - packet[j]));
  }
  if (reversal > 1e-9) failed.push_back("reversibility");

  double ho = 0.0;
  {
    const Grid1D g(-10.0, 10.0, 501);
    const auto v = g.sample([](double x) { return 0.5 * x * x; });
    const auto w = relax(WaveField::from_function(g, [](double x) { return (1 + 0.3 * x) * std::exp(-(x - 1) * (x - 1)); }),
                         v, 4000, {0.05, std::numbers::pi / 2});
    ho = kinetic_expectation(w) + expectation(w, v);
  }
  if (std::abs(ho - 0.5) > 1e-4) failed.push_back("oscillator");

  double real_velocity = 0.0;
  {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    GuidingWaveSet w{grid, {}};
    WalkerEnsemble e;
    for (std::size_t k = 0; k < 200; ++k) {
      const double c1 = u(gen), c2 = u(gen);
      w.waves[0].push_back(normalize(WaveField::from_function(grid, [&](double x) { return (1 + x) * std::exp(-(x - c1) * (x - c1)); })));
      w.waves[1].push_back(normalize(WaveField::from_function(grid, [&](double x) { return std::exp(-0.5 * (x - c2) * (x - c2)); })));
      e.positions[0].push_back(u(gen));
      e.positions[1].push_back(u(gen));
    }
    for (std::size_t k = 0; k < 200; ++k)
      for (std::size_t i = 0; i < kElectrons; ++i)
        real_velocity = std::max(real_velocity, std::abs(guidance_velocity(k, i, w, e).value));
  }
  if (real_velocity != 0.0) failed.push_back("real-wave velocity");

  const double gauss =
      std::abs(norm_squared(WaveField::from_function(grid, [](double x) { return std::exp(-x * x / 0.25); })) -
               0.5 * std::sqrt(std::numbers::pi / 2));
  if (gauss > 1e-8) failed.push_back("Gaussian quadrature");
  if (norm_defect > 1e-6) failed.push_back("norm + absorbed");

  bool bitwise = true;
  {
    EngineConfig c;
    c.walkers = 64;
    c.n_relax_steps = 100;
    c.seed = 9;
    const auto regime = CorrelationRegime::effective({BandwidthMode::adaptive, 1.0, 10});
    const auto pu = pulse(1.22, 0.3);
    std::array<std::string, 2> csv;
    std::array<WalkerEnsemble, 2> ens;
    for (int r = 0; r < 2; ++r) {
      const auto g = relax_ground_state(c, regime);
      csv[r] = propagate_realtime(g, c, regime, pu, 100, 1).to_csv();
      ens[r] = g.state.ensemble;
    }
    bitwise = csv[0] == csv[1] && ens[0].positions == ens[1].positions;
  }
  if (!bitwise) failed.push_back("determinism");

  std::string which;
  for (const auto& f : failed) which += (which.empty() ? "" : ", ") + f;
  report(10, failed.empty(),
         fmt("CN norm drift %.1e/step (<= 1e-10), reversal %.1e (<= 1e-9), oscillator E %.7f (0.5 +- 1e-4), "
             "real-wave |v| %.1e, Gaussian quadrature %.1e (<= 1e-8), norm + absorbed - 1 = %.1e (<= 1e-6), "
             "repeat run %s%s%s",
             unitarity, reversal, ho, real_velocity, gauss, norm_defect, bitwise ? "bitwise identical" : "differs",
             which.empty() ? "" : "; failed: ", which.c_str()));
}

}  // namespace

int main() {
  note("reference solvers");
  const auto ref = reference_energies();
  note("ground-state bandwidth scan");
  const auto ground = ground_state_scan(ref);
  regime_limits(ground);
  note("low-frequency runs");
  const auto low = low_frequency(ref);
  note("high-frequency runs");
  high_frequency(ref);
  intensity_order(low);
  hygiene(low.norm_defect);
  note(fmt("done, %d failing", failures));
  return failures == 0 ? 0 : 1;
}
