#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tdqmc {

using complex = std::complex<double>;

/// Uniform grid x_j = x_min + j*dx, j = 0..n-1, in atomic units.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t n_points);

  /// 512 points over [-25, 25] a.u.
  static Grid1D production();

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t size() const { return n_; }
  double dx() const { return dx_; }
  double x(std::size_t j) const { return x_min_ + static_cast<double>(j) * dx_; }
  std::vector<double> points() const;

  /// Fractional grid coordinate (x - x_min)/dx, unclamped.
  double coordinate(double x) const { return (x - x_min_) / dx_; }

  template <class F>
  std::vector<double> sample(F&& f) const {
    std::vector<double> out(n_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = f(x(j));
    return out;
  }

  bool operator==(const Grid1D&) const = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double dx_;
};

/// Complex amplitudes on a Grid1D: one guiding wave or orbital.
class WaveField {
 public:
  explicit WaveField(Grid1D grid);
  WaveField(Grid1D grid, std::vector<complex> amplitudes);

  template <class F>
  static WaveField from_function(const Grid1D& grid, F&& f) {
    std::vector<complex> a(grid.size());
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = complex(f(grid.x(j)));
    return WaveField(grid, std::move(a));
  }

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return amps_.size(); }
  std::span<const complex> amplitudes() const { return amps_; }
  std::span<complex> amplitudes() { return amps_; }
  complex operator[](std::size_t j) const { return amps_[j]; }
  complex& operator[](std::size_t j) { return amps_[j]; }

  WaveField& operator*=(complex c);

 private:
  Grid1D grid_;
  std::vector<complex> amps_;
};

/// Rectangle rule: sum_j conj(a_j) b_j dx, accumulated left to right.
complex inner_product(const WaveField& a, const WaveField& b);

double norm_squared(const WaveField& w);

/// Returns w / ||w||. Throws DegenerateStateError for a zero-norm field.
WaveField normalize(WaveField w);

/// sum_j v_j |w_j|^2 dx. `v` is sampled on the same grid.
double expectation(const WaveField& w, std::span<const double> v);

/// <w| -1/2 d^2/dx^2 |w> with the 3-point Laplacian and zero boundary values.
double kinetic_expectation(const WaveField& w);

/// <w|x|w>
double dipole(const WaveField& w);

}  // namespace tdqmc
