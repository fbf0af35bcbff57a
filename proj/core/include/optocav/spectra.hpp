#pragma once

#include <Eigen/Dense>
#include <vector>

#include "optocav/fluctuations.hpp"
#include "optocav/model.hpp"
#include "optocav/steady_state.hpp"

namespace optocav {

/// Modes whose output amplitude falls below this fraction of the largest one
/// are excluded from normalized spectra (the normalization divides by the
/// amplitude) and reported as masked.
inline constexpr double kMaskThreshold = 1e-8;

/// Output-field second moments at one analysis frequency, thermal occupation
/// folded in. Indexed by mode ordinals (n, m):
///   aa(n,m)        ~ < da_n(+W)  da_m(-W)  >
///   a_adag(n,m)    ~ < da_n(+W)  ddag_m(-W)>
///   adag_a(n,m)    ~ < ddag_n(+W) da_m(-W) >
///   adag_adag(n,m) ~ < ddag_n(+W) ddag_m(-W)>
/// each the coefficient of the frequency-matching delta.
struct MomentSet {
  double omega = 0.0;
  double thermal_occupation = 0.0;
  int mode_count = 0;
  Eigen::MatrixXcd aa, a_adag, adag_a, adag_adag;
};

MomentSet output_moments(const MomentKernel& kernel, const ModelParams& params);

/// Mode-resolved intensity correlation spectrum. `s` is the normalized matrix
/// (coherent baseline = identity), zeroed on masked rows/columns;
/// `covariance` is the unnormalized symmetrized intensity covariance, defined
/// for every mode pair including masked ones.
struct SpectrumResult {
  double omega = 0.0;
  double thermal_occupation = 0.0;
  Eigen::MatrixXd s;
  Eigen::MatrixXd covariance;
  std::vector<bool> masked;
  double s_total = 0.0;
  double max_imag_residue = 0.0;
};

/// Expands the four moment blocks with the output-amplitude phases and
/// normalizes. The result is symmetrized; the discarded imaginary residue is
/// tracked and a residue above 1e-8 on any normalized entry raises
/// ConsistencyError (it would mean broken contraction bookkeeping, the
/// moment matrix must be Hermitian). s_total is 0 when the output carries no
/// power at all; total_intensity_spectrum, by contrast, treats that as a
/// domain error.
SpectrumResult intensity_spectrum_matrix(const MomentSet& moments, const SteadyState& steady);

/// Total output intensity spectrum: all modes summed before normalizing by
/// the total output power (coherent baseline = 1). DomainError on zero total
/// output power.
double total_intensity_spectrum(const MomentSet& moments, const SteadyState& steady);

/// The spectra actually emitted by the front end: per-mode autocorrelations,
/// correlations against the fundamental, and the total. Computed directly
/// from the kernel in O(mode count) kernel evaluations, never materializing
/// the full matrix.
struct SpectrumSlices {
  double omega = 0.0;
  double thermal_occupation = 0.0;
  std::vector<double> s_auto;    // S(n, n)
  std::vector<double> s_cross0;  // S(0, n)
  std::vector<bool> masked;
  double s_total = 0.0;
};

SpectrumSlices spectra_slices(const MomentKernel& kernel, const ModelParams& params,
                              const SteadyState& steady, const ModeGrid& grid);

}  // namespace optocav
