#pragma once

#include <string>
#include <vector>

#include "tdqmc/grid.hpp"

namespace tdqmc {

/// Soft-core parameters for the 1D helium model.
struct SoftCoreParams {
  double a = 1.0;               ///< e-n softening (a.u.^2)
  double b = 1.2;               ///< e-e softening (a.u.)
  double nuclear_charge = 2.0;  ///< fixed for helium

  void validate() const;
};

enum class Envelope { sin2, flat_top };

std::string to_string(Envelope e);
Envelope envelope_from_string(const std::string& s);

/// Linearly polarized pulse E(t) = env(t) e0 cos(omega (t - t_start)).
struct PulseSpec {
  double e0 = 0.0;
  double omega = 0.136;
  int n_cycles = 8;
  Envelope envelope = Envelope::sin2;
  double t_start = 0.0;

  double duration() const;
  double t_end() const { return t_start + duration(); }
  void validate() const;
};

/// -Z / sqrt(a + x^2)
double v_en(double x, const SoftCoreParams& p = {});

/// 1 / (b + |d|)
double v_ee(double d, const SoftCoreParams& p = {});

/// Envelope value in [0, 1]; zero outside the pulse window.
double envelope(double t, const PulseSpec& p);

double field(double t, const PulseSpec& p);

/// Length-gauge dipole coupling -x E(t).
double v_ext(double x, double t, const PulseSpec& p);

std::vector<double> sample_v_en(const Grid1D& grid, const SoftCoreParams& p);

}  // namespace tdqmc
