#include "optocav/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "optocav/errors.hpp"

namespace optocav {

namespace {

constexpr double kRootResidualTol = 1e-8;
constexpr double kIdentityTol = 1e-10;

std::vector<double> gaussian_weights(const ModelParams& params, const ModeGrid& grid) {
  // |e_n|^2 / P_in for the Gaussian pump
  const double wp = params.pump_waist;
  const double pre = 2.0 * std::numbers::pi * (wp / grid.box_side) * (wp / grid.box_side);
  std::vector<double> w(grid.k_squared.size());
  for (std::size_t n = 0; n < w.size(); ++n)
    w[n] = pre * std::exp(-0.5 * wp * wp * grid.k_squared[n]);
  return w;
}

double curve_slope(double P, const ModelParams& params, const ModeGrid& grid) {
  const double h = 1e-7 * std::max(1.0, P);
  const double lo = std::max(P - h, P * 0.5);
  return (input_power_at(P + h, params, grid) - input_power_at(lo, params, grid)) / (P + h - lo);
}

}  // namespace

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::lower: return "lower";
    case Branch::upper: return "upper";
    case Branch::unstable: return "unstable";
  }
  return "?";
}

double input_power_for_weights(double P, std::span<const double> detunings,
                               std::span<const double> weights) {
  if (!(P >= 0.0)) throw DomainError("input_power: intracavity power must be >= 0");
  if (detunings.size() != weights.size())
    throw DomainError("input_power: detunings/weights size mismatch");
  if (P == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t n = 0; n < weights.size(); ++n) {
    const double d = detunings[n] - P;
    sum += weights[n] / (1.0 + d * d);
  }
  if (!(sum > 0.0)) throw DomainError("input_power: pump carries no power");
  return P / sum;
}

double input_power_at(double P, const ModelParams& params, const ModeGrid& grid) {
  const std::vector<double> w = gaussian_weights(params, grid);
  return input_power_for_weights(P, grid.detunings, w);
}

BistabilityCurve trace_bistability(const ModelParams& params, const ModeGrid& grid,
                                   double P_max, int steps) {
  if (!(P_max > 0.0)) throw DomainError("trace_bistability: P_max must be > 0");
  if (steps < 2) throw DomainError("trace_bistability: steps must be >= 2");

  BistabilityCurve curve;
  curve.samples.resize(static_cast<std::size_t>(steps));
  for (int i = 1; i <= steps; ++i) {
    const double P = P_max * i / steps;
    curve.samples[i - 1] = {P, input_power_at(P, params, grid), true};
  }
  // slope sign by finite difference on the sampled curve (one-sided at ends)
  for (int i = 0; i < steps; ++i) {
    const int lo = std::max(i - 1, 0);
    const int hi = std::min(i + 1, steps - 1);
    const auto& a = curve.samples[lo];
    const auto& b = curve.samples[hi];
    curve.samples[i].stable =
        (b.input_power - a.input_power) / (b.intracavity_power - a.intracavity_power) > 0.0;
  }
  return curve;
}

std::vector<PowerRoot> solve_intracavity_power(double P_in, const ModelParams& params,
                                               const ModeGrid& grid) {
  if (!(P_in >= 0.0)) throw DomainError("solve_intracavity_power: P_in must be >= 0");
  if (P_in == 0.0) return {{0.0, true}};

  // Every root satisfies P = P_in * sum_n w_n / (1 + ...) <= P_in * sum w_n,
  // and sum w_n <= 1 + truncation slack, so the scan window below is safe.
  const double P_max = std::max(4.0 * params.detuning0 + 4.0, 1.1 * P_in + 1.0);
  const int n_scan = 2000;
  const double tol = kRootResidualTol * std::max(1.0, P_in);

  auto f = [&](double P) { return input_power_at(P, params, grid) - P_in; };

  std::vector<PowerRoot> roots;
  double prev_P = 0.0;
  double prev_f = -P_in;  // f(0+) -> -P_in
  for (int i = 1; i <= n_scan; ++i) {
    const double P = P_max * i / n_scan;
    const double fi = f(P);
    if (fi == 0.0) {
      roots.push_back({P, curve_slope(P, params, grid) > 0.0});
    } else if (prev_f * fi < 0.0) {
      double a = prev_P, b = P, fa = prev_f;
      for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, b); ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (std::abs(fm) < tol * 1e-4) { a = b = m; break; }
        if (fa * fm <= 0.0) b = m; else { a = m; fa = fm; }
      }
      const double r = 0.5 * (a + b);
      roots.push_back({r, curve_slope(r, params, grid) > 0.0});
    }
    prev_P = P;
    prev_f = fi;
  }
  std::sort(roots.begin(), roots.end(), [](const PowerRoot& a, const PowerRoot& b) {
    return a.intracavity_power < b.intracavity_power;
  });
  return roots;
}

namespace {

SteadyState assemble_steady(const std::vector<Complex>& pump, double P,
                            const ModelParams& params, const ModeGrid& grid) {
  SteadyState st;
  st.pump = pump;
  st.intracavity_power = P;
  st.amplitudes.resize(pump.size());
  st.output_amplitudes.resize(pump.size());
  double sum = 0.0;
  double p_in = 0.0;
  for (std::size_t n = 0; n < pump.size(); ++n) {
    const Complex a = pump[n] / Complex(1.0, grid.detunings[n] - P);
    st.amplitudes[n] = a;
    st.output_amplitudes[n] = 2.0 * a - pump[n];
    sum += std::norm(a);
    p_in += std::norm(pump[n]);
  }
  if (std::abs(sum - P) > kIdentityTol * std::max(1.0, P))
    throw ConsistencyError("steady state: sum |alpha_n|^2 = " + std::to_string(sum) +
                           " does not reproduce the requested intracavity power " +
                           std::to_string(P));
  st.input_power = p_in;
  st.mirror_displacement = P / params.coupling;

  // branch label from the slope of the curve this pump shape traces
  std::vector<double> w(pump.size());
  if (p_in > 0.0) {
    for (std::size_t n = 0; n < pump.size(); ++n) w[n] = std::norm(pump[n]) / p_in;
    const double h = 1e-7 * std::max(1.0, P);
    const double lo = std::max(P - h, P * 0.5);
    const double slope = (input_power_for_weights(P + h, grid.detunings, w) -
                          input_power_for_weights(lo, grid.detunings, w)) /
                         (P + h - lo);
    if (slope <= 0.0) {
      st.branch = Branch::unstable;
    } else {
      // lower unless a smaller stable power reaches the same input power
      st.branch = Branch::lower;
      const int n_scan = 400;
      double prev_f = -p_in;
      for (int i = 1; i <= n_scan; ++i) {
        const double Pi = (P * (1.0 - 1e-6)) * i / n_scan;
        const double fi = input_power_for_weights(Pi, grid.detunings, w) - p_in;
        if (prev_f * fi < 0.0 || fi == 0.0) {
          st.branch = Branch::upper;
          break;
        }
        prev_f = fi;
      }
    }
  }
  return st;
}

}  // namespace

SteadyState steady_state_at(double P, const ModelParams& params, const ModeGrid& grid) {
  params.validate();
  if (!(P >= 0.0)) throw DomainError("steady_state_at: P must be >= 0");
  const double p_in = input_power_at(P, params, grid);
  ModelParams scaled = params;
  scaled.pump_amplitude = std::sqrt(p_in);
  SteadyState st = assemble_steady(pump_components(scaled, grid), P, params, grid);
  // the nominal input power, rather than its truncated-grid pump sum
  st.input_power = p_in;
  return st;
}

SteadyState steady_state_from_pump(const std::vector<Complex>& pump, double P,
                                   const ModelParams& params, const ModeGrid& grid) {
  params.validate();
  if (!(P >= 0.0)) throw DomainError("steady_state_from_pump: P must be >= 0");
  if (pump.size() != static_cast<std::size_t>(grid.count()))
    throw DomainError("steady_state_from_pump: pump size does not match the grid");
  return assemble_steady(pump, P, params, grid);
}

std::vector<RadialSample> radial_profile(const SteadyState& steady, const ModeGrid& grid,
                                         int n_samples, double r_max) {
  if (n_samples < 2) throw DomainError("radial_profile: n_samples must be >= 2");
  if (!(r_max > 0.0)) throw DomainError("radial_profile: r_max must be > 0");
  std::vector<RadialSample> out(static_cast<std::size_t>(n_samples));
  const double inv_l = 1.0 / grid.box_side;
  for (int i = 0; i < n_samples; ++i) {
    const double r = r_max * i / (n_samples - 1);
    Complex in{0.0, 0.0}, cav{0.0, 0.0}, refl{0.0, 0.0};
    for (int n = 0; n < grid.count(); ++n) {
      const auto k = grid.wavevector(n);
      const Complex phase = std::exp(Complex(0.0, k[0] * r));
      in += steady.pump[n] * phase;
      cav += steady.amplitudes[n] * phase;
      refl += steady.output_amplitudes[n] * phase;
    }
    out[i] = {r, in * inv_l, cav * inv_l, refl * inv_l};
  }
  return out;
}

ClassicalState classical_fixed_point(const SteadyState& steady, const ModelParams& params) {
  return {steady.amplitudes, steady.intracavity_power / params.coupling, 0.0};
}

Trajectory integrate_classical(const ModelParams& params, const ModeGrid& grid,
                               const std::vector<Complex>& pump, ClassicalState initial,
                               double t_end, double dt) {
  params.validate();
  const std::size_t m = pump.size();
  if (m != static_cast<std::size_t>(grid.count()))
    throw DomainError("integrate_classical: pump size does not match the grid");
  if (initial.amplitudes.size() != m)
    throw DomainError("integrate_classical: initial amplitudes size does not match the grid");
  if (!(t_end > 0.0)) throw DomainError("integrate_classical: t_end must be > 0");
  const double dt_cap = std::min(1.0, 2.0 * std::numbers::pi / (10.0 * params.mirror_freq));
  if (!(dt > 0.0 && dt < dt_cap))
    throw DomainError("integrate_classical: dt must lie in (0, " + std::to_string(dt_cap) +
                      ") to resolve both the cavity and the mirror");

  const double om2 = params.mirror_freq * params.mirror_freq;
  const double g = params.coupling;
  const double gm = params.mirror_damping;

  double pump_power = 0.0;
  for (const Complex& e : pump) pump_power += std::norm(e);
  const double guard = 1e6 * std::max(1.0, pump_power);

  struct Deriv {
    std::vector<Complex> da;
    double dx = 0.0, dv = 0.0;
  };
  // returns the power of the evaluated state (reused for the divergence guard)
  auto rhs = [&](const std::vector<Complex>& a, double x, double v, Deriv& d) {
    double power = 0.0;
    for (std::size_t n = 0; n < m; ++n) {
      d.da[n] = Complex(-1.0, g * x - grid.detunings[n]) * a[n] + pump[n];
      power += std::norm(a[n]);
    }
    d.dx = v;
    d.dv = -om2 * x + om2 / g * power - gm * v;
    return power;
  };

  const long n_steps = static_cast<long>(std::ceil(t_end / dt));
  const long stride = std::max<long>(1, n_steps / 1000);

  Trajectory traj;
  traj.power_trace.reserve(static_cast<std::size_t>(n_steps / stride) + 2);
  std::vector<Complex> a = std::move(initial.amplitudes);
  double x = initial.displacement, v = initial.velocity;
  Deriv k1, k2, k3, k4;
  k1.da.resize(m); k2.da.resize(m); k3.da.resize(m); k4.da.resize(m);
  std::vector<Complex> tmp(m);

  auto record = [&](double t) {
    double power = 0.0;
    for (const Complex& an : a) power += std::norm(an);
    traj.power_trace.push_back({t, power});
    return power;
  };
  record(0.0);

  double t = 0.0;
  for (long step = 0; step < n_steps; ++step) {
    const double h = std::min(dt, t_end - t);
    if (!(h > 0.0)) break;  // t_end already reached through rounding
    const double power = rhs(a, x, v, k1);
    if (!std::isfinite(power) || !std::isfinite(x) || power > guard ||
        std::abs(x) * params.coupling > guard) {
      throw NumericalError("integrate_classical: diverged at step " + std::to_string(step) +
                           " (t = " + std::to_string(t) + "); reduce dt");
    }
    for (std::size_t n = 0; n < m; ++n) tmp[n] = a[n] + 0.5 * h * k1.da[n];
    rhs(tmp, x + 0.5 * h * k1.dx, v + 0.5 * h * k1.dv, k2);
    for (std::size_t n = 0; n < m; ++n) tmp[n] = a[n] + 0.5 * h * k2.da[n];
    rhs(tmp, x + 0.5 * h * k2.dx, v + 0.5 * h * k2.dv, k3);
    for (std::size_t n = 0; n < m; ++n) tmp[n] = a[n] + h * k3.da[n];
    rhs(tmp, x + h * k3.dx, v + h * k3.dv, k4);
    for (std::size_t n = 0; n < m; ++n)
      a[n] += h / 6.0 * (k1.da[n] + 2.0 * k2.da[n] + 2.0 * k3.da[n] + k4.da[n]);
    x += h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    v += h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    t += h;

    if ((step + 1) % stride == 0 || step + 1 == n_steps) record(t);
  }
  traj.state = {std::move(a), x, v};
  traj.final_time = t;
  return traj;
}

}  // namespace optocav
