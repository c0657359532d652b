#include "tdqmc/grid.hpp"

#include <cmath>
#include <string>

#include "tdqmc/error.hpp"

namespace tdqmc {

Grid1D::Grid1D(double x_min, double x_max, std::size_t n_points)
    : x_min_(x_min), x_max_(x_max), n_(n_points), dx_(0.0) {
  if (n_points < 8) {
    throw ConfigError("grid needs at least 8 points, got " + std::to_string(n_points));
  }
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw ConfigError("grid requires finite x_min < x_max");
  }
  dx_ = (x_max - x_min) / static_cast<double>(n_points - 1);
}

Grid1D Grid1D::production() { return Grid1D(-25.0, 25.0, 512); }

std::vector<double> Grid1D::points() const {
  std::vector<double> p(n_);
  for (std::size_t j = 0; j < n_; ++j) p[j] = x(j);
  return p;
}

WaveField::WaveField(Grid1D grid) : grid_(grid), amps_(grid.size()) {}

WaveField::WaveField(Grid1D grid, std::vector<complex> amplitudes)
    : grid_(grid), amps_(std::move(amplitudes)) {
  if (amps_.size() != grid_.size()) {
    throw ConfigError("wave field length " + std::to_string(amps_.size()) +
                      " does not match grid size " + std::to_string(grid_.size()));
  }
}

WaveField& WaveField::operator*=(complex c) {
  for (auto& a : amps_) a *= c;
  return *this;
}

namespace {

void require_same_grid(const WaveField& a, const WaveField& b) {
  if (!(a.grid() == b.grid())) throw ConfigError("wave fields live on different grids");
}

void require_grid_length(const WaveField& w, std::span<const double> v) {
  if (v.size() != w.size()) throw ConfigError("potential length does not match grid");
}

}  // namespace

complex inner_product(const WaveField& a, const WaveField& b) {
  require_same_grid(a, b);
  // Accumulate real and imaginary parts separately so that <a|b> and <b|a>
  // are exact conjugates of one another.
  double re = 0.0;
  double im = 0.0;
  const auto pa = a.amplitudes();
  const auto pb = b.amplitudes();
  for (std::size_t j = 0; j < pa.size(); ++j) {
    re += pa[j].real() * pb[j].real() + pa[j].imag() * pb[j].imag();
    im += pa[j].real() * pb[j].imag() - pa[j].imag() * pb[j].real();
  }
  const double dx = a.grid().dx();
  return {re * dx, im * dx};
}

double norm_squared(const WaveField& w) {
  double s = 0.0;
  for (const auto& c : w.amplitudes()) s += std::norm(c);
  return s * w.grid().dx();
}

WaveField normalize(WaveField w) {
  const double n2 = norm_squared(w);
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw DegenerateStateError("cannot normalize a wave field with norm^2 = " + std::to_string(n2));
  }
  w *= complex(1.0 / std::sqrt(n2));
  return w;
}

double expectation(const WaveField& w, std::span<const double> v) {
  require_grid_length(w, v);
  double s = 0.0;
  const auto a = w.amplitudes();
  for (std::size_t j = 0; j < a.size(); ++j) s += v[j] * std::norm(a[j]);
  return s * w.grid().dx();
}

double kinetic_expectation(const WaveField& w) {
  const auto a = w.amplitudes();
  const std::size_t n = a.size();
  const double inv_dx2 = 1.0 / (w.grid().dx() * w.grid().dx());
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    complex lap = -2.0 * a[j];
    if (j > 0) lap += a[j - 1];
    if (j + 1 < n) lap += a[j + 1];
    s += (std::conj(a[j]) * lap).real();
  }
  return -0.5 * s * inv_dx2 * w.grid().dx();
}

double dipole(const WaveField& w) {
  const auto a = w.amplitudes();
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += w.grid().x(j) * std::norm(a[j]);
  return s * w.grid().dx();
}

}  // namespace tdqmc
