#include "tdqmc/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tdqmc/error.hpp"
#include "tdqmc/propagator.hpp"

namespace tdqmc {

namespace {

StepSpec imaginary(const GroundStateOptions& opt) { return {opt.dt, std::numbers::pi / 2}; }

void check_options(const GroundStateOptions& opt) {
  if (!(opt.dt > 0.0)) throw ConfigError("ground-state dt must be positive");
  if (opt.max_steps == 0) throw ConfigError("ground-state max_steps must be positive");
  if (!(opt.tolerance > 0.0)) throw ConfigError("ground-state tolerance must be positive");
  if (!(opt.mixing > 0.0 && opt.mixing <= 1.0)) throw ConfigError("Hartree mixing must lie in (0, 1]");
}

void check_options(const PropagationOptions& opt) {
  if (!(opt.dt > 0.0)) throw ConfigError("propagation dt must be positive");
  if (opt.record_every == 0) throw ConfigError("record_every must be at least 1");
}

std::vector<double> coupling_or_zero(const Grid1D& grid, const SoftCoreParams& params, bool on) {
  return on ? coupling_matrix(grid, params) : std::vector<double>(grid.size() * grid.size(), 0.0);
}

// Sum over grid points of conj(f) (T1 + T2) f, times dx^2.
double kinetic_2d(const Field2D& f) {
  const std::size_t n = f.n();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      complex lap = -4.0 * f(i, j);
      if (i > 0) lap += f(i - 1, j);
      if (i + 1 < n) lap += f(i + 1, j);
      if (j > 0) lap += f(i, j - 1);
      if (j + 1 < n) lap += f(i, j + 1);
      s += (std::conj(f(i, j)) * lap).real();
    }
  }
  return -0.5 * s;  // the 1/dx^2 of the Laplacian cancels the dx^2 of the measure
}

double dipole_orbital(const WaveField& phi) { return 2.0 * dipole(phi); }

}  // namespace

std::vector<double> coupling_matrix(const Grid1D& grid, const SoftCoreParams& params) {
  const std::size_t n = grid.size();
  std::vector<double> c(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = v_ee(grid.x(i) - grid.x(j), params);
  return c;
}

double exact_energy(const Field2D& psi, const SoftCoreParams& params, bool electron_repulsion) {
  const auto& g = psi.grid();
  const std::size_t n = psi.n();
  const auto ven = sample_v_en(g, params);
  double pot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = ven[i] + ven[j];
      if (electron_repulsion) v += v_ee(g.x(i) - g.x(j), params);
      pot += v * std::norm(psi(i, j));
    }
  }
  const double dx2 = g.dx() * g.dx();
  const double n2 = norm_squared(psi);
  if (!(n2 > 0.0)) throw DegenerateStateError("energy of a zero 2D field");
  return (kinetic_2d(psi) + pot * dx2) / n2;
}

ExactState exact_ground_state(const Grid1D& grid, const SoftCoreParams& params, const GroundStateOptions& opt) {
  check_options(opt);
  params.validate();
  const auto coupling = coupling_or_zero(grid, params, opt.electron_repulsion);
  const AdiStepper stepper(grid, coupling, imaginary(opt));
  const auto ven = sample_v_en(grid, params);

  Field2D psi = normalize(Field2D::from_function(grid, [](double a, double b) { return std::exp(-(a * a + b * b)); }));
  double e = exact_energy(psi, params, opt.electron_repulsion);
  for (std::size_t s = 1; s <= opt.max_steps; ++s) {
    stepper.step(psi, ven);
    symmetrize(psi);
    psi = normalize(std::move(psi));
    const double next = exact_energy(psi, params, opt.electron_repulsion);
    if (!std::isfinite(next)) throw NumericalError("exact ground-state energy became non-finite");
    const double change = std::abs(next - e);
    e = next;
    if (change < opt.tolerance) return {std::move(psi), e, s};
  }
  throw ConvergenceError("exact ground state not converged after " + std::to_string(opt.max_steps) +
                         " steps (last energy " + std::to_string(e) + ")");
}

ExactGap exact_first_gap(const ExactState& ground, const SoftCoreParams& params, const GroundStateOptions& opt) {
  check_options(opt);
  const Grid1D& grid = ground.psi.grid();
  const auto coupling = coupling_or_zero(grid, params, opt.electron_repulsion);
  const AdiStepper stepper(grid, coupling, imaginary(opt));
  const auto ven = sample_v_en(grid, params);
  const Field2D& psi0 = ground.psi;

  auto project = [&](Field2D& f) {
    const complex c = inner_product(psi0, f);
    auto d = f.data();
    const auto g = psi0.data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] -= c * g[k];
  };

  // symmetric in exchange, mixed parity so either parity sector can win
  Field2D psi = Field2D::from_function(
      grid, [](double a, double b) { return (1.0 + 0.5 * (a + b)) * std::exp(-0.5 * (a * a + b * b)); });
  project(psi);
  psi = normalize(std::move(psi));
  double e = exact_energy(psi, params, opt.electron_repulsion);
  for (std::size_t s = 1; s <= opt.max_steps; ++s) {
    stepper.step(psi, ven);
    symmetrize(psi);
    project(psi);
    psi = normalize(std::move(psi));
    const double next = exact_energy(psi, params, opt.electron_repulsion);
    if (!std::isfinite(next)) throw NumericalError("excited-state energy became non-finite");
    const double change = std::abs(next - e);
    e = next;
    if (change < opt.tolerance) return {ground.energy, e, e - ground.energy, s};
  }
  throw ConvergenceError("excited state not converged after " + std::to_string(opt.max_steps) +
                         " steps (last energy " + std::to_string(e) + ")");
}

ExactRun exact_propagate(const Field2D& ground, const SoftCoreParams& params, const PulseSpec& pulse,
                         std::size_t n_steps, const PropagationOptions& opt) {
  check_options(opt);
  pulse.validate();
  const Grid1D& grid = ground.grid();
  const auto coupling = coupling_matrix(grid, params);
  const AdiStepper stepper(grid, coupling, StepSpec{opt.dt, 0.0});
  const auto ven = sample_v_en(grid, params);
  const auto xs = grid.points();
  const Absorber absorber(grid, opt.absorber_fraction);

  Field2D psi = ground;
  double absorbed = 0.0;
  double absorbed_outside = 0.0;  // removed mass weighted by its fraction of coordinates beyond the radius
  TimeSeries ts;
  std::vector<double> axis(grid.size());
  const std::size_t n = grid.size();
  std::vector<double> beyond(n);
  for (std::size_t j = 0; j < n; ++j) beyond[j] = std::abs(xs[j]) > opt.radius ? 0.5 : 0.0;
  const auto mask = absorber.mask();

  auto record = [&](std::size_t s) {
    Record r;
    r.t = static_cast<double>(s) * opt.dt;
    r.field = field(r.t, pulse);
    r.ion_proj = ionization_projection_exact(psi, ground);
    const auto [p1, p2] = exceedance_marginals(psi, opt.radius);
    r.ion_region = std::clamp(0.5 * (p1 + p2) + absorbed_outside, 0.0, 1.0);
    if (opt.energy_every && (s % opt.energy_every == 0 || s == n_steps)) r.energy = exact_energy(psi, params);
    r.dipole = dipole(psi);
    r.absorbed_norm = absorbed;
    ts.append(r);
  };

  record(0);
  for (std::size_t s = 0; s < n_steps; ++s) {
    const double e = field((static_cast<double>(s) + 0.5) * opt.dt, pulse);
    for (std::size_t j = 0; j < axis.size(); ++j) axis[j] = ven[j] - xs[j] * e;
    stepper.step(psi, axis);
    if (opt.absorber) {
      double removed = 0.0;
      double removed_outside = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double m = mask[i] * mask[j];
          if (m == 1.0) continue;
          complex& a = psi(i, j);
          const double lost = std::norm(a) - std::norm(a * m);
          removed += lost;
          removed_outside += lost * (beyond[i] + beyond[j]);
          a *= m;
        }
      }
      absorbed += removed * grid.dx() * grid.dx();
      absorbed_outside += removed_outside * grid.dx() * grid.dx();
    }
    if ((s + 1) % opt.record_every == 0 || s + 1 == n_steps) record(s + 1);
  }
  const double survival = two_electron_survival(psi, ground);
  const auto [p1, p2] = exceedance_marginals(psi, opt.radius);
  const double region_full = std::clamp(0.5 * (p1 + p2) + absorbed, 0.0, 1.0);
  return {std::move(ts), std::move(psi), survival, region_full};
}

std::vector<double> hartree_potential(const WaveField& phi, const SoftCoreParams& params) {
  const Grid1D& g = phi.grid();
  const std::size_t n = g.size();
  std::vector<double> rho(n);
  for (std::size_t j = 0; j < n; ++j) rho[j] = std::norm(phi[j]);
  // v_ee depends on |x_i - x_j| only: tabulate by index distance
  std::vector<double> kernel(n);
  for (std::size_t d = 0; d < n; ++d) kernel[d] = v_ee(static_cast<double>(d) * g.dx(), params);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += kernel[i > j ? i - j : j - i] * rho[j];
    out[i] = s * g.dx();
  }
  return out;
}

double hartree_energy(const WaveField& phi, const SoftCoreParams& params, bool electron_repulsion) {
  const auto ven = sample_v_en(phi.grid(), params);
  double e = 2.0 * (kinetic_expectation(phi) + expectation(phi, ven));
  if (electron_repulsion) e += expectation(phi, hartree_potential(phi, params));
  return e;
}

HartreeOrbital hartree_scf_ground(const Grid1D& grid, const SoftCoreParams& params, const GroundStateOptions& opt) {
  check_options(opt);
  params.validate();
  const StepSpec spec = imaginary(opt);
  const auto ven = sample_v_en(grid, params);
  WaveField phi = normalize(WaveField::from_function(grid, [](double x) { return std::exp(-x * x); }));
  std::vector<double> vh = opt.electron_repulsion ? hartree_potential(phi, params) : std::vector<double>(grid.size());
  std::vector<double> v(grid.size());
  double residual = 0.0;
  for (std::size_t it = 1; it <= opt.max_steps; ++it) {
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = ven[j] + vh[j];
    WaveField next = normalize(cn_step(phi, v, spec));
    residual = 0.0;
    for (std::size_t j = 0; j < next.size(); ++j) residual += std::norm(next[j] - phi[j]);
    residual = std::sqrt(residual * grid.dx());
    phi = std::move(next);
    if (opt.electron_repulsion) {
      const auto fresh = hartree_potential(phi, params);
      for (std::size_t j = 0; j < vh.size(); ++j) vh[j] = (1.0 - opt.mixing) * vh[j] + opt.mixing * fresh[j];
    }
    if (!std::isfinite(residual)) throw NumericalError("Hartree iteration became non-finite");
    if (residual < opt.tolerance) {
      return {phi, hartree_energy(phi, params, opt.electron_repulsion), it, residual};
    }
  }
  throw ConvergenceError("Hartree SCF not converged after " + std::to_string(opt.max_steps) +
                         " iterations (orbital change " + std::to_string(residual) + ", mixing " +
                         std::to_string(opt.mixing) + ")");
}

TdhfRun tdhf_propagate(const HartreeOrbital& ground, const SoftCoreParams& params, const PulseSpec& pulse,
                       std::size_t n_steps, const PropagationOptions& opt) {
  check_options(opt);
  pulse.validate();
  const Grid1D& grid = ground.phi.grid();
  const auto ven = sample_v_en(grid, params);
  const auto xs = grid.points();
  const Absorber absorber(grid, opt.absorber_fraction);
  const StepSpec spec{opt.dt, 0.0};

  WaveField phi = ground.phi;
  double absorbed = 0.0;
  TimeSeries ts;
  std::vector<double> v(grid.size());

  auto record = [&](std::size_t s) {
    Record r;
    r.t = static_cast<double>(s) * opt.dt;
    r.field = field(r.t, pulse);
    r.ion_proj = ionization_projection_orbital(phi, ground.phi);
    double outside = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j)
      if (std::abs(xs[j]) > opt.radius) outside += std::norm(phi[j]);
    r.ion_region = std::clamp(outside * grid.dx() + absorbed, 0.0, 1.0);
    if (opt.energy_every && (s % opt.energy_every == 0 || s == n_steps)) {
      const double n2 = norm_squared(phi);
      if (n2 > 0.0) r.energy = hartree_energy(normalize(phi), params);
    }
    r.dipole = dipole_orbital(phi);
    r.absorbed_norm = absorbed;
    ts.append(r);
  };

  record(0);
  for (std::size_t s = 0; s < n_steps; ++s) {
    const double e = field((static_cast<double>(s) + 0.5) * opt.dt, pulse);
    const auto vh = hartree_potential(phi, params);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = ven[j] + vh[j] - xs[j] * e;
    phi = cn_step(phi, v, spec);
    if (opt.absorber) {
      const double before = norm_squared(phi);
      absorber.apply(phi.amplitudes());
      absorbed += before - norm_squared(phi);
    }
    if ((s + 1) % opt.record_every == 0 || s + 1 == n_steps) record(s + 1);
  }
  return {std::move(ts), std::move(phi)};
}

}  // namespace tdqmc
