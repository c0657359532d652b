#include "tdqmc/potentials.hpp"

#include <cmath>
#include <numbers>

#include "tdqmc/error.hpp"

namespace tdqmc {

void SoftCoreParams::validate() const {
  if (!(a > 0.0)) throw ConfigError("soft-core parameter a must be positive");
  if (!(b > 0.0)) throw ConfigError("soft-core parameter b must be positive");
}

std::string to_string(Envelope e) { return e == Envelope::sin2 ? "sin2" : "flat_top"; }

Envelope envelope_from_string(const std::string& s) {
  if (s == "sin2") return Envelope::sin2;
  if (s == "flat_top" || s == "flat-top") return Envelope::flat_top;
  throw ConfigError("unknown envelope '" + s + "' (expected sin2 or flat_top)");
}

double PulseSpec::duration() const {
  return static_cast<double>(n_cycles) * 2.0 * std::numbers::pi / omega;
}

void PulseSpec::validate() const {
  if (!(e0 >= 0.0)) throw ConfigError("pulse e0 must be >= 0");
  if (!(omega > 0.0)) throw ConfigError("pulse omega must be > 0");
  if (n_cycles < 1) throw ConfigError("pulse n_cycles must be >= 1");
  if (!std::isfinite(t_start)) throw ConfigError("pulse t_start must be finite");
}

double v_en(double x, const SoftCoreParams& p) { return -p.nuclear_charge / std::sqrt(p.a + x * x); }

double v_ee(double d, const SoftCoreParams& p) { return 1.0 / (p.b + std::abs(d)); }

double envelope(double t, const PulseSpec& p) {
  const double T = p.duration();
  const double s = t - p.t_start;
  if (s < 0.0 || s > T) return 0.0;
  if (p.envelope == Envelope::sin2) {
    const double v = std::sin(std::numbers::pi * s / T);
    return v * v;
  }
  // flat top with one-cycle sin^2 ramps on each side
  const double ramp = std::min(T / static_cast<double>(p.n_cycles), 0.5 * T);
  double r = 1.0;
  if (s < ramp) {
    r = std::sin(0.5 * std::numbers::pi * s / ramp);
  } else if (s > T - ramp) {
    r = std::sin(0.5 * std::numbers::pi * (T - s) / ramp);
  } else {
    return 1.0;
  }
  return r * r;
}

double field(double t, const PulseSpec& p) {
  const double env = envelope(t, p);
  if (env == 0.0) return 0.0;
  return env * p.e0 * std::cos(p.omega * (t - p.t_start));
}

double v_ext(double x, double t, const PulseSpec& p) { return -x * field(t, p); }

std::vector<double> sample_v_en(const Grid1D& grid, const SoftCoreParams& p) {
  return grid.sample([&](double x) { return v_en(x, p); });
}

}  // namespace tdqmc
