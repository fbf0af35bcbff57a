#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "optocav/errors.hpp"

namespace optocav {

using Complex = std::complex<double>;

/// Laboratory-frame cavity constants, SI units. Only used to derive the
/// optomechanical coupling rate; everything else in the library works in
/// scaled units.
struct PhysicalParams {
  double mirror_mass = 0.0;     // kg
  double mirror_freq = 0.0;     // rad/s
  double cavity_length = 0.0;   // m
  double optical_freq = 0.0;    // rad/s

  /// Throws DomainError unless all fields are strictly positive.
  void validate() const;
};

/// Single-photon radiation-pressure coupling g = (omega_0 / L) sqrt(hbar / (m omega_m)),
/// in rad/s.
double coupling_from_physical(const PhysicalParams& p, double hbar);

/// Soft checks on PhysicalParams that do not invalidate a computation.
/// Currently: the sideband hierarchy optical_freq >> mirror_freq.
std::vector<std::string> physical_warnings(const PhysicalParams& p);

/// Dimensionless model parameters. Conventions:
///  - rates and frequencies are in units of the cavity amplitude decay rate,
///  - lengths (pump waist, box side) are in units of the cavity diffraction
///    length, which never appears explicitly,
///  - pump_amplitude and the mode amplitudes carry the additional
///    sqrt(coupling^2 / mirror_freq) rescaling that removes the coupling
///    constant from the steady-state and fluctuation equations.
struct ModelParams {
  double detuning0 = 2.0;           // fundamental-mode detuning
  double mirror_freq = 10.0;        // omega_m
  double mirror_damping = 1e-5;     // gamma_m
  double coupling = 1.0;            // g; only enters mirror-displacement readout
  double thermal_occupation = 1e4;  // N_T = k_B T / (hbar omega_m)
  double pump_amplitude = 1.7;      // scalar pump strength, real
  double pump_waist = 2.0;          // w_p

  /// Throws DomainError on out-of-domain values. Accepts any
  /// thermal_occupation >= 0; the underlying noise model is only meant for
  /// large occupations, which is not enforced here.
  void validate() const;

  double quality_factor() const { return mirror_freq / mirror_damping; }
};

/// One transverse plane-wave mode. `flat` is the canonical even row offset of
/// the mode's (annihilation, creation) pair in the fluctuation vector:
/// flat = 2 (2 n̄ + 1)(n_y + n̄) + 2 (n_x + n̄).
struct ModeIndex {
  int nx = 0;
  int ny = 0;
  int flat = 0;
};

/// Truncated transverse-mode lattice on a periodic square box of side `box_side`:
/// k_n = (2 pi / box_side) (n_x, n_y) with n_x, n_y in [-half_extent, half_extent],
/// and per-mode detunings detuning0 + |k_n|^2. Immutable after construction.
struct ModeGrid {
  int half_extent = 0;
  double box_side = 0.0;
  double detuning0 = 0.0;
  std::vector<ModeIndex> indices;    // ordered n_y-major, n_x-minor
  std::vector<double> k_squared;     // |k_n|^2 per ordinal
  std::vector<double> detunings;     // detuning0 + |k_n|^2 per ordinal
  std::vector<std::string> warnings;

  int side() const { return 2 * half_extent + 1; }
  int count() const { return side() * side(); }

  bool contains(int nx, int ny) const {
    return nx >= -half_extent && nx <= half_extent && ny >= -half_extent && ny <= half_extent;
  }

  /// Position of mode (nx, ny) in the ordinal storage order; DomainError if
  /// outside the lattice.
  int ordinal(int nx, int ny) const;

  /// Inverse of ModeIndex::flat; DomainError on odd or out-of-range values.
  ModeIndex mode_of_flat(int flat) const;

  std::array<double, 2> wavevector(int ordinal) const;
};

/// Builds the mode lattice. Warns (grid.warnings) when box_side < 4 * pump_waist,
/// where the periodic images of the pump start to overlap.
ModeGrid build_grid(const ModelParams& params, int half_extent, double box_side);

/// Plane-wave components of the Gaussian pump:
/// e_n = pump_amplitude * sqrt(2 pi) * (w_p / box_side) * exp(-(w_p/2)^2 |k_n|^2).
/// Real and positive, maximal at n = 0; returned per grid ordinal.
std::vector<Complex> pump_components(const ModelParams& params, const ModeGrid& grid);

}  // namespace optocav
