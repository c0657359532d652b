#include "tdqmc/propagator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "tdqmc/error.hpp"

namespace tdqmc {

complex StepSpec::delta() const { return dt * std::polar(1.0, -rotation_angle); }

void StepSpec::validate() const {
  if (!(dt > 0.0)) throw ConfigError("time step dt must be positive");
  if (!(rotation_angle >= 0.0 && rotation_angle <= 0.5 * std::numbers::pi)) {
    throw ConfigError("rotation_angle must lie in [0, pi/2]");
  }
}

CrankNicolsonOperator::CrankNicolsonOperator(std::span<const double> v, double dx, complex delta)
    : half_(complex(0.0, 0.5) * delta),
      off_(half_ * (-0.5 / (dx * dx))),
      diag_(v.size()),
      rhs_diag_(v.size()),
      cprime_(v.size()),
      inv_pivot_(v.size()) {
  const std::size_t n = v.size();
  const double kin = 1.0 / (dx * dx);
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(v[j])) throw NumericalError("non-finite potential at grid index " + std::to_string(j));
    diag_[j] = 1.0 + half_ * (kin + v[j]);
    rhs_diag_[j] = 1.0 - half_ * (kin + v[j]);
  }
  complex prev = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const complex pivot = diag_[j] - off_ * prev;
    if (std::abs(pivot) < 1e-300) throw NumericalError("singular Crank-Nicolson system");
    inv_pivot_[j] = 1.0 / pivot;
    cprime_[j] = off_ * inv_pivot_[j];
    prev = cprime_[j];
  }
}

void CrankNicolsonOperator::apply(std::span<complex> psi, std::span<complex> scratch) const {
  const std::size_t n = diag_.size();
  // explicit half: rhs = (1 - i delta H/2) psi, written into scratch
  for (std::size_t j = 0; j < n; ++j) {
    complex r = rhs_diag_[j] * psi[j];
    const complex left = j > 0 ? psi[j - 1] : complex(0.0);
    const complex right = j + 1 < n ? psi[j + 1] : complex(0.0);
    r -= off_ * (left + right);
    scratch[j] = r;
  }
  // Thomas forward sweep then back substitution
  complex prev = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    prev = (scratch[j] - off_ * prev) * inv_pivot_[j];
    scratch[j] = prev;
  }
  psi[n - 1] = scratch[n - 1];
  for (std::size_t j = n - 1; j-- > 0;) psi[j] = scratch[j] - cprime_[j] * psi[j + 1];
}

WaveField cn_step(const WaveField& w, std::span<const double> v, const StepSpec& s) {
  if (v.size() != w.size()) throw ConfigError("potential length does not match grid");
  const CrankNicolsonOperator op(v, w.grid().dx(), s.delta());
  WaveField out = w;
  std::vector<complex> scratch(w.size());
  op.apply(out.amplitudes(), scratch);
  return out;
}

void cn_step_batch(std::span<const std::span<complex>> waves, std::span<const std::span<const double>> potentials,
                   double dx, complex delta) {
  if (waves.size() != potentials.size()) throw ConfigError("one potential per wave is required");
  if (waves.empty()) return;
  const std::size_t n = waves[0].size();
  for (std::size_t b = 0; b < waves.size(); ++b) {
    if (waves[b].size() != n || potentials[b].size() != n) throw ConfigError("batched waves differ in length");
  }
  constexpr std::size_t B = 8;
  const complex half = complex(0.0, 0.5) * delta;
  const complex offc = half * (-0.5 / (dx * dx));
  const double hr = half.real(), hi = half.imag(), or_ = offc.real(), oi = offc.imag();
  const double kin = 1.0 / (dx * dx);
  // [j * B + lane] layout; re/im kept apart so lanes map onto SIMD registers
  std::vector<double> pr(n * B), pi(n * B), rr(n * B), ri(n * B), cr(n * B), ci(n * B), vv(n * B);
  const std::array<double, B> zero{};

  for (std::size_t first = 0; first < waves.size(); first += B) {
    const std::size_t lanes = std::min(B, waves.size() - first);
    for (std::size_t l = 0; l < B; ++l) {
      const std::size_t b = first + std::min(l, lanes - 1);
      const auto psi = waves[b];
      const auto v = potentials[b];
      for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(v[j])) throw NumericalError("non-finite potential at grid index " + std::to_string(j));
        pr[j * B + l] = l < lanes ? psi[j].real() : 0.0;
        pi[j * B + l] = l < lanes ? psi[j].imag() : 0.0;
        vv[j * B + l] = kin + v[j];
      }
    }
    // explicit half: r = (1 - half (kin + v)) psi - off (psi[j-1] + psi[j+1])
    for (std::size_t j = 0; j < n; ++j) {
      const double* __restrict w = &vv[j * B];
      const double* __restrict p0 = &pr[j * B];
      const double* __restrict p1 = &pi[j * B];
      const double* __restrict lo0 = j > 0 ? &pr[(j - 1) * B] : zero.data();
      const double* __restrict lo1 = j > 0 ? &pi[(j - 1) * B] : zero.data();
      const double* __restrict hi0 = j + 1 < n ? &pr[(j + 1) * B] : zero.data();
      const double* __restrict hi1 = j + 1 < n ? &pi[(j + 1) * B] : zero.data();
      double* __restrict r0 = &rr[j * B];
      double* __restrict r1 = &ri[j * B];
#pragma GCC ivdep
      for (std::size_t l = 0; l < B; ++l) {
        const double dr = 1.0 - hr * w[l], di = -hi * w[l];
        const double sr = lo0[l] + hi0[l], si = lo1[l] + hi1[l];
        r0[l] = (dr * p0[l] - di * p1[l]) - (or_ * sr - oi * si);
        r1[l] = (dr * p1[l] + di * p0[l]) - (or_ * si + oi * sr);
      }
    }
    // forward sweep: pivot = d - off c'[j-1]; c' = off / pivot; p = (r - off p[j-1]) / pivot
    for (std::size_t j = 0; j < n; ++j) {
      const double* __restrict w = &vv[j * B];
      const double* __restrict c0 = j > 0 ? &cr[(j - 1) * B] : zero.data();
      const double* __restrict c1 = j > 0 ? &ci[(j - 1) * B] : zero.data();
      const double* __restrict q0 = j > 0 ? &rr[(j - 1) * B] : zero.data();
      const double* __restrict q1 = j > 0 ? &ri[(j - 1) * B] : zero.data();
      double* __restrict x0 = &rr[j * B];
      double* __restrict x1 = &ri[j * B];
      double* __restrict o0 = &cr[j * B];
      double* __restrict o1 = &ci[j * B];
#pragma GCC ivdep
      for (std::size_t l = 0; l < B; ++l) {
        const double mr = (1.0 + hr * w[l]) - (or_ * c0[l] - oi * c1[l]);
        const double mi = hi * w[l] - (or_ * c1[l] + oi * c0[l]);
        const double xr = x0[l] - (or_ * q0[l] - oi * q1[l]);
        const double xi = x1[l] - (or_ * q1[l] + oi * q0[l]);
        const double inv = 1.0 / (mr * mr + mi * mi);
        const double ir = mr * inv, ii = -mi * inv;
        o0[l] = or_ * ir - oi * ii;
        o1[l] = or_ * ii + oi * ir;
        x0[l] = xr * ir - xi * ii;
        x1[l] = xr * ii + xi * ir;
      }
    }
    // back substitution
    for (std::size_t j = n; j-- > 0;) {
      const double* __restrict c0 = &cr[j * B];
      const double* __restrict c1 = &ci[j * B];
      const double* __restrict x0 = &rr[j * B];
      const double* __restrict x1 = &ri[j * B];
      const double* __restrict q0 = j + 1 < n ? &pr[(j + 1) * B] : zero.data();
      const double* __restrict q1 = j + 1 < n ? &pi[(j + 1) * B] : zero.data();
      double* __restrict y0 = &pr[j * B];
      double* __restrict y1 = &pi[j * B];
#pragma GCC ivdep
      for (std::size_t l = 0; l < B; ++l) {
        y0[l] = x0[l] - (c0[l] * q0[l] - c1[l] * q1[l]);
        y1[l] = x1[l] - (c0[l] * q1[l] + c1[l] * q0[l]);
      }
    }
    for (std::size_t l = 0; l < lanes; ++l) {
      const auto psi = waves[first + l];
      for (std::size_t j = 0; j < n; ++j) psi[j] = complex(pr[j * B + l], pi[j * B + l]);
    }
  }
}

WaveField relax(WaveField w, const PotentialProvider& v, std::size_t n_steps, const StepSpec& s) {
  if (n_steps == 0) return w;
  if (!(s.rotation_angle > 0.0)) throw ConfigError("relaxation needs a positive rotation angle");
  std::vector<complex> scratch(w.size());
  for (std::size_t step = 0; step < n_steps; ++step) {
    const auto pot = v(step, w);
    if (pot.size() != w.size()) throw ConfigError("potential length does not match grid");
    const CrankNicolsonOperator op(pot, w.grid().dx(), s.delta());
    op.apply(w.amplitudes(), scratch);
    w = normalize(std::move(w));
  }
  return w;
}

WaveField relax(WaveField w, std::span<const double> v, std::size_t n_steps, const StepSpec& s) {
  if (n_steps == 0) return w;
  if (!(s.rotation_angle > 0.0)) throw ConfigError("relaxation needs a positive rotation angle");
  if (v.size() != w.size()) throw ConfigError("potential length does not match grid");
  const CrankNicolsonOperator op(v, w.grid().dx(), s.delta());
  std::vector<complex> scratch(w.size());
  for (std::size_t step = 0; step < n_steps; ++step) {
    op.apply(w.amplitudes(), scratch);
    w = normalize(std::move(w));
  }
  return w;
}

Absorber::Absorber(const Grid1D& grid, double fraction) : mask_(grid.size(), 1.0) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("absorber fraction must lie in (0, 1)");
  const double center = 0.5 * (grid.x_min() + grid.x_max());
  const double half = 0.5 * (grid.x_max() - grid.x_min());
  const double xa = fraction * half;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double r = std::abs(grid.x(j) - center);
    if (r > xa) {
      const double c = std::cos(std::numbers::pi * (r - xa) / (2.0 * (half - xa)));
      mask_[j] = c > 0.0 ? std::pow(c, 0.125) : 0.0;
    }
  }
}

void Absorber::apply(std::span<complex> psi) const {
  for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= mask_[j];
}

}  // namespace tdqmc
