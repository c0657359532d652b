#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tdqmc/grid.hpp"
#include "tdqmc/propagator.hpp"

namespace tdqmc {

/// Two-coordinate amplitudes Psi(x1, x2) on grid x grid, stored row-major
/// with x2 contiguous: index = i1 * n + i2.
class Field2D {
 public:
  explicit Field2D(Grid1D grid);
  Field2D(Grid1D grid, std::vector<complex> data);

  template <class F>
  static Field2D from_function(const Grid1D& grid, F&& f) {
    Field2D out(grid);
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out.data_[i * n + j] = complex(f(grid.x(i), grid.x(j)));
    return out;
  }

  /// Psi(x1, x2) = a(x1) b(x2)
  static Field2D product(const WaveField& a, const WaveField& b);

  const Grid1D& grid() const { return grid_; }
  std::size_t n() const { return grid_.size(); }
  complex operator()(std::size_t i1, std::size_t i2) const { return data_[i1 * n() + i2]; }
  complex& operator()(std::size_t i1, std::size_t i2) { return data_[i1 * n() + i2]; }
  std::span<const complex> data() const { return data_; }
  std::span<complex> data() { return data_; }

  Field2D& operator*=(complex c);

 private:
  Grid1D grid_;
  std::vector<complex> data_;
};

complex inner_product(const Field2D& a, const Field2D& b);
double norm_squared(const Field2D& f);
Field2D normalize(Field2D f);

/// max |Psi(x1,x2) - Psi(x2,x1)|
double exchange_asymmetry(const Field2D& f);

/// Psi <- (Psi(x1,x2) + Psi(x2,x1)) / 2
void symmetrize(Field2D& f);

/// v(x1) + v(x2) + coupling(x1, x2). The one-body part `axis` is shared by
/// both coordinates; `coupling` is row-major like Field2D.
struct Potential2D {
  std::vector<double> axis;
  std::vector<double> coupling;
};

/// Alternating-direction Crank-Nicolson for H = T1 + T2 + v(x1) + v(x2) + c(x1,x2).
/// The one-body part is treated implicitly along each axis; the coupling is
/// applied as exp(-i delta c / 2) on both sides (Strang splitting). For c = 0
/// a step is exactly the tensor product of two 1D Crank-Nicolson steps.
class AdiStepper {
 public:
  AdiStepper(const Grid1D& grid, std::span<const double> coupling, const StepSpec& step);

  /// Advance in place with the given one-body potential.
  void step(Field2D& f, std::span<const double> axis) const;

  const StepSpec& spec() const { return spec_; }

 private:
  void sweep_rows(Field2D& f, const CrankNicolsonOperator& op) const;
  void sweep_columns(Field2D& f, const CrankNicolsonOperator& op) const;

  Grid1D grid_;
  StepSpec spec_;
  std::vector<complex> half_coupling_;  // exp(-i delta c / 2)
};

Field2D adi_step_2d(const Field2D& f, const Potential2D& v, const StepSpec& s);

/// Separable mask m(x1) m(x2).
void apply_absorber(Field2D& f, const Absorber& absorber);

}  // namespace tdqmc
