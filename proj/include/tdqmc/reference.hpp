#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tdqmc/field2d.hpp"
#include "tdqmc/observables.hpp"
#include "tdqmc/potentials.hpp"

namespace tdqmc {

/// Imaginary-time settings shared by the exact and Hartree ground-state solvers.
struct GroundStateOptions {
  double dt = 0.05;
  std::size_t max_steps = 20000;
  double tolerance = 1e-7;        ///< |dE| per step (exact) or orbital change (Hartree)
  double mixing = 0.5;            ///< Hartree potential mixing factor
  bool electron_repulsion = true; ///< false drops v_ee (separable test hook)
};

struct ExactState {
  Field2D psi;
  double energy = 0.0;
  std::size_t steps = 0;
};

/// Two-electron ground state on grid x grid by imaginary-time ADI from a
/// symmetric Gaussian, stopped when |dE| < tolerance between steps.
ExactState exact_ground_state(const Grid1D& grid, const SoftCoreParams& params, const GroundStateOptions& opt = {});

struct ExactGap {
  double ground = 0.0;
  double excited = 0.0;
  double gap = 0.0;
  std::size_t steps = 0;
};

/// Lowest exchange-symmetric excitation: imaginary-time ADI with the ground
/// state projected out and the state symmetrized after every step.
ExactGap exact_first_gap(const ExactState& ground, const SoftCoreParams& params, const GroundStateOptions& opt = {});

/// <Psi|H|Psi> / <Psi|Psi> with the 3-point Laplacian on both axes.
double exact_energy(const Field2D& psi, const SoftCoreParams& params, bool electron_repulsion = true);

/// Row-major v_ee(x1 - x2) on grid x grid.
std::vector<double> coupling_matrix(const Grid1D& grid, const SoftCoreParams& params);

struct PropagationOptions {
  double dt = 0.1;
  std::size_t record_every = 1;
  std::size_t energy_every = 50;
  bool absorber = true;
  double absorber_fraction = 0.8;
  double radius = 10.0;
};

struct ExactRun {
  TimeSeries series;
  Field2D final_state;
  double two_electron_survival = 0.0;  ///< |<Psi0|Psi(T)>|^2
  /// Final region measure with every absorbed pair counted as ionized,
  /// rather than by its fraction of coordinates beyond the radius.
  double region_full_absorbed = 0.0;
};

/// Real-time ADI under v_ext = -(x1 + x2) E(t) with the separable absorber.
/// absorbed_norm accumulates the norm removed by the mask. ion_region is
/// 1/2 [Pr(|x1| > r) + Pr(|x2| > r)] plus the removed mass weighted by the
/// fraction of its two coordinates beyond r, the per-coordinate analog of
/// walker counting.
ExactRun exact_propagate(const Field2D& ground, const SoftCoreParams& params, const PulseSpec& pulse,
                         std::size_t n_steps, const PropagationOptions& opt = {});

struct HartreeOrbital {
  WaveField phi;
  double energy = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Int |phi(y)|^2 v_ee(x - y) dy on the orbital's grid.
std::vector<double> hartree_potential(const WaveField& phi, const SoftCoreParams& params);

/// 2 <phi|h|phi> + Int Int |phi(x)|^2 v_ee(x - y) |phi(y)|^2, phi normalized.
double hartree_energy(const WaveField& phi, const SoftCoreParams& params, bool electron_repulsion = true);

/// Doubly occupied orbital by self-consistent imaginary-time steps with
/// damped mixing of the Hartree potential.
HartreeOrbital hartree_scf_ground(const Grid1D& grid, const SoftCoreParams& params,
                                  const GroundStateOptions& opt = {});

struct TdhfRun {
  TimeSeries series;
  WaveField final_orbital;
};

/// Real-time Hartree propagation, mean field rebuilt from |phi|^2 every step.
TdhfRun tdhf_propagate(const HartreeOrbital& ground, const SoftCoreParams& params, const PulseSpec& pulse,
                       std::size_t n_steps, const PropagationOptions& opt = {});

}  // namespace tdqmc
