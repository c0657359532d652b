#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tdqmc/grid.hpp"

namespace tdqmc {

/// Time step in the complex plane: delta = dt * exp(-i * rotation_angle).
/// rotation_angle = 0 is real time, pi/2 is imaginary time.
struct StepSpec {
  double dt = 0.1;
  double rotation_angle = 0.0;

  complex delta() const;
  bool real_time() const { return rotation_angle == 0.0; }
  void validate() const;
};

/// Factorization of (1 + i delta/2 H) for H = -1/2 d^2 + v on a uniform grid
/// with zero boundary values. Reusable across every field that shares `v`.
class CrankNicolsonOperator {
 public:
  CrankNicolsonOperator(std::span<const double> v, double dx, complex delta);

  /// psi <- (1 + i delta H/2)^-1 (1 - i delta H/2) psi.
  /// `scratch` must hold at least size() elements.
  void apply(std::span<complex> psi, std::span<complex> scratch) const;

  std::size_t size() const { return diag_.size(); }

  complex half_step() const { return half_; }
  complex off_diagonal() const { return off_; }
  std::span<const complex> explicit_diagonal() const { return rhs_diag_; }
  std::span<const complex> forward_ratio() const { return cprime_; }
  std::span<const complex> inverse_pivot() const { return inv_pivot_; }

 private:
  complex half_;                    // i delta / 2
  complex off_;                     // half_ * (-1/(2 dx^2)), for both sides
  std::vector<complex> diag_;       // implicit diagonal 1 + half_ h_jj
  std::vector<complex> rhs_diag_;   // explicit diagonal 1 - half_ h_jj
  std::vector<complex> cprime_;     // Thomas forward ratios
  std::vector<complex> inv_pivot_;  // 1 / pivot
};

/// One Crank-Nicolson step of H = -1/2 d^2/dx^2 + v (3-point Laplacian).
/// Real time is unitary; rotated time decays the norm and the caller
/// renormalizes.
WaveField cn_step(const WaveField& w, std::span<const double> v, const StepSpec& s);

/// In-place Crank-Nicolson step of many waves, wave b under potential
/// potentials[b]. Blocks of waves are interleaved so the Thomas recurrences
/// vectorize across waves; agrees with CrankNicolsonOperator to rounding.
void cn_step_batch(std::span<const std::span<complex>> waves, std::span<const std::span<const double>> potentials,
                   double dx, complex delta);

/// Potential for step `step` given the current field.
using PotentialProvider = std::function<std::vector<double>(std::size_t step, const WaveField& current)>;

/// n_steps rotated-time steps, renormalizing after each.
WaveField relax(WaveField w, const PotentialProvider& v, std::size_t n_steps, const StepSpec& s);
WaveField relax(WaveField w, std::span<const double> v, std::size_t n_steps, const StepSpec& s);

/// Boundary mask m(x) = cos^{1/8}(pi (|x| - x_a) / (2 (x_max - x_a))) for
/// |x| > x_a = fraction * x_max, 1 inside. |x| is measured from the grid
/// center so asymmetric boxes work too.
class Absorber {
 public:
  explicit Absorber(const Grid1D& grid, double fraction = 0.8);

  std::span<const double> mask() const { return mask_; }
  void apply(std::span<complex> psi) const;

 private:
  std::vector<double> mask_;
};

}  // namespace tdqmc
