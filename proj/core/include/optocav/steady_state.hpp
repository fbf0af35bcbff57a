#pragma once

#include <span>
#include <vector>

#include "optocav/model.hpp"

namespace optocav {

enum class Branch { lower, upper, unstable };

const char* branch_name(Branch b);

struct BistabilitySample {
  double intracavity_power = 0.0;  // P
  double input_power = 0.0;        // P_in
  bool stable = true;              // sign of dP_in/dP on the sampled curve
};

struct BistabilityCurve {
  std::vector<BistabilitySample> samples;  // intracavity_power strictly increasing
};

/// Classical multimode working point. Amplitudes are stored per grid ordinal
/// in the scaled units of ModelParams (coupling folded into the amplitude
/// normalization).
struct SteadyState {
  std::vector<Complex> amplitudes;         // alpha_n
  std::vector<Complex> output_amplitudes;  // 2 alpha_n - e_n
  std::vector<Complex> pump;               // e_n actually driving this state
  double intracavity_power = 0.0;          // P = sum |alpha_n|^2
  double input_power = 0.0;                // P_in = sum |e_n|^2
  double mirror_displacement = 0.0;        // x = P / coupling
  Branch branch = Branch::lower;
};

/// Input power required to sustain intracavity power P for a pump of the
/// given per-mode power fractions (weights[n] = |e_n|^2 / P_in):
///   P_in = P / sum_n weights[n] / (1 + (detuning[n] - P)^2).
double input_power_for_weights(double P, std::span<const double> detunings,
                               std::span<const double> weights);

/// Same, for the Gaussian pump described by params.
double input_power_at(double P, const ModelParams& params, const ModeGrid& grid);

/// Parametric sweep P in (0, P_max], `steps` samples; stability flag from the
/// finite-difference slope of the sampled curve.
BistabilityCurve trace_bistability(const ModelParams& params, const ModeGrid& grid,
                                   double P_max, int steps);

struct PowerRoot {
  double intracavity_power = 0.0;
  bool stable = true;
};

/// All intracavity powers consistent with the given input power, ascending.
/// Dense scan plus bisection; every root r satisfies
/// |input_power_at(r) - P_in| < 1e-8 max(1, P_in).
std::vector<PowerRoot> solve_intracavity_power(double P_in, const ModelParams& params,
                                               const ModeGrid& grid);

/// Steady state on the branch point with intracavity power P. The matching
/// input power is computed from P; the per-mode amplitudes follow from the
/// Lorentzian mode response, the output from the input-output relation.
SteadyState steady_state_at(double P, const ModelParams& params, const ModeGrid& grid);

/// Steady state for an explicitly supplied pump vector (testing hook, e.g. a
/// flat pump driving only the fundamental). (pump, P) must already solve the
/// self-consistency condition sum_n |e_n|^2 / (1 + (detuning_n - P)^2) = P;
/// throws ConsistencyError otherwise.
SteadyState steady_state_from_pump(const std::vector<Complex>& pump, double P,
                                   const ModelParams& params, const ModeGrid& grid);

struct RadialSample {
  double r = 0.0;
  Complex input;   // pump field at radius r
  Complex cavity;  // intracavity field
  Complex output;  // reflected field
};

/// Field profiles along a transverse radius, reconstructed from the mode
/// expansion (the profile is isotropic for the symmetric Gaussian pump).
std::vector<RadialSample> radial_profile(const SteadyState& steady, const ModeGrid& grid,
                                         int n_samples, double r_max);

// ---------------------------------------------------------------------------
// Time-domain oracle: noise-free classical dynamics.
// ---------------------------------------------------------------------------

struct ClassicalState {
  std::vector<Complex> amplitudes;
  double displacement = 0.0;  // mirror position x, same units as SteadyState
  double velocity = 0.0;      // dx/dt
};

struct Trajectory {
  ClassicalState state;                            // state at final_time
  double final_time = 0.0;
  std::vector<std::array<double, 2>> power_trace;  // sampled (t, sum |alpha|^2)
};

/// Classical state sitting exactly on a steady state.
ClassicalState classical_fixed_point(const SteadyState& steady, const ModelParams& params);

/// Fixed-step 4th-order Runge-Kutta integration of the coupled mode/mirror
/// equations
///   d alpha_n / dt = (-i detuning_n + i g x - 1) alpha_n + e_n,
///   x'' = -omega_m^2 x + (omega_m^2 / g) sum |alpha|^2 - gamma_m x'.
/// Requires dt < min(1, 2 pi / (10 omega_m)) so both time scales are resolved.
/// Throws NumericalError, naming the step, if the state diverges.
Trajectory integrate_classical(const ModelParams& params, const ModeGrid& grid,
                               const std::vector<Complex>& pump, ClassicalState initial,
                               double t_end, double dt);

}  // namespace optocav
