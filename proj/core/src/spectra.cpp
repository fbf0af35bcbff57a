#include "optocav/spectra.hpp"

#include <cmath>

#include "optocav/errors.hpp"

namespace optocav {

namespace {

constexpr double kImagResidueError = 1e-8;

std::vector<bool> mask_modes(const SteadyState& steady) {
  double max_amp = 0.0;
  for (const Complex& a : steady.output_amplitudes) max_amp = std::max(max_amp, std::abs(a));
  std::vector<bool> masked(steady.output_amplitudes.size());
  for (std::size_t n = 0; n < masked.size(); ++n)
    masked[n] = std::abs(steady.output_amplitudes[n]) < kMaskThreshold * max_amp || max_amp == 0.0;
  return masked;
}

double total_output_power(const SteadyState& steady) {
  double p = 0.0;
  for (const Complex& a : steady.output_amplitudes) p += std::norm(a);
  return p;
}

// Intensity covariance entry: the four second moments weighted by the
// output-amplitude phases.
Complex intensity_entry(const MomentSet& ms, const std::vector<Complex>& ao, int n, int m) {
  const Complex an = ao[static_cast<std::size_t>(n)];
  const Complex am = ao[static_cast<std::size_t>(m)];
  return std::conj(an) * std::conj(am) * ms.aa(n, m) + std::conj(an) * am * ms.a_adag(n, m) +
         an * std::conj(am) * ms.adag_a(n, m) + an * am * ms.adag_adag(n, m);
}

}  // namespace

MomentSet output_moments(const MomentKernel& kernel, const ModelParams& params) {
  params.validate();
  MomentSet ms;
  ms.omega = kernel.omega();
  ms.thermal_occupation = params.thermal_occupation;
  ms.mode_count = kernel.size() / 2;
  const int m = ms.mode_count;
  const double nt = ms.thermal_occupation;
  ms.aa.resize(m, m);
  ms.a_adag.resize(m, m);
  ms.adag_a.resize(m, m);
  ms.adag_adag.resize(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      ms.aa(i, j) = kernel.vacuum(2 * i, 2 * j) + nt * kernel.thermal(2 * i, 2 * j);
      ms.a_adag(i, j) = kernel.vacuum(2 * i, 2 * j + 1) + nt * kernel.thermal(2 * i, 2 * j + 1);
      ms.adag_a(i, j) = kernel.vacuum(2 * i + 1, 2 * j) + nt * kernel.thermal(2 * i + 1, 2 * j);
      ms.adag_adag(i, j) =
          kernel.vacuum(2 * i + 1, 2 * j + 1) + nt * kernel.thermal(2 * i + 1, 2 * j + 1);
    }
  }
  return ms;
}

SpectrumResult intensity_spectrum_matrix(const MomentSet& moments, const SteadyState& steady) {
  const int m = moments.mode_count;
  if (steady.output_amplitudes.size() != static_cast<std::size_t>(m))
    throw ConsistencyError("intensity_spectrum_matrix: steady state does not match the moments");

  SpectrumResult res;
  res.omega = moments.omega;
  res.thermal_occupation = moments.thermal_occupation;
  res.masked = mask_modes(steady);
  res.s = Eigen::MatrixXd::Zero(m, m);
  res.covariance.resize(m, m);

  const std::vector<Complex>& ao = steady.output_amplitudes;
  for (int n = 0; n < m; ++n) {
    for (int mm = 0; mm <= n; ++mm) {
      // The ordered moment matrix is Hermitian in (n, m); the measured
      // spectrum is its symmetrized (real) part. Any imaginary part of the
      // symmetrized entry is a bookkeeping defect, not physics.
      const Complex sym =
          0.5 * (intensity_entry(moments, ao, n, mm) + intensity_entry(moments, ao, mm, n));
      res.covariance(n, mm) = sym.real();
      res.covariance(mm, n) = sym.real();
      if (!res.masked[static_cast<std::size_t>(n)] && !res.masked[static_cast<std::size_t>(mm)]) {
        const double norm =
            std::abs(ao[static_cast<std::size_t>(n)]) * std::abs(ao[static_cast<std::size_t>(mm)]);
        const double residue = std::abs(sym.imag()) / norm;
        res.max_imag_residue = std::max(res.max_imag_residue, residue);
        if (residue > kImagResidueError)
          throw ConsistencyError("intensity_spectrum_matrix: imaginary residue " +
                                 std::to_string(residue) + " on entry (" + std::to_string(n) +
                                 ", " + std::to_string(mm) + ")");
        res.s(n, mm) = sym.real() / norm;
        res.s(mm, n) = res.s(n, mm);
      }
    }
  }

  const double power = total_output_power(steady);
  res.s_total = power > 0.0 ? total_intensity_spectrum(moments, steady) : 0.0;
  return res;
}

double total_intensity_spectrum(const MomentSet& moments, const SteadyState& steady) {
  const int m = moments.mode_count;
  if (steady.output_amplitudes.size() != static_cast<std::size_t>(m))
    throw ConsistencyError("total_intensity_spectrum: steady state does not match the moments");
  const double power = total_output_power(steady);
  if (!(power > 0.0)) throw DomainError("total_intensity_spectrum: zero total output power");

  Eigen::VectorXcd a(m), c(m);
  for (int n = 0; n < m; ++n) {
    a(n) = steady.output_amplitudes[static_cast<std::size_t>(n)];
    c(n) = std::conj(a(n));
  }
  const Complex total = (c.transpose() * moments.aa * c).value() +
                        (c.transpose() * moments.a_adag * a).value() +
                        (a.transpose() * moments.adag_a * c).value() +
                        (a.transpose() * moments.adag_adag * a).value();
  if (std::abs(total.imag()) > kImagResidueError * std::max(1.0, std::abs(total.real())) * power)
    throw ConsistencyError("total_intensity_spectrum: imaginary residue in the total");
  return total.real() / power;
}

SpectrumSlices spectra_slices(const MomentKernel& kernel, const ModelParams& params,
                              const SteadyState& steady, const ModeGrid& grid) {
  params.validate();
  const int m = kernel.size() / 2;
  if (steady.output_amplitudes.size() != static_cast<std::size_t>(m) || grid.count() != m)
    throw ConsistencyError("spectra_slices: steady state / grid / kernel size mismatch");

  SpectrumSlices out;
  out.omega = kernel.omega();
  out.thermal_occupation = params.thermal_occupation;
  out.masked = mask_modes(steady);
  out.s_auto.assign(static_cast<std::size_t>(m), 0.0);
  out.s_cross0.assign(static_cast<std::size_t>(m), 0.0);

  const double nt = params.thermal_occupation;
  const std::vector<Complex>& ao = steady.output_amplitudes;
  auto moment = [&](int r, int s) { return kernel.vacuum(r, s) + nt * kernel.thermal(r, s); };
  auto entry = [&](int n, int mm) {
    const Complex an = ao[static_cast<std::size_t>(n)];
    const Complex am = ao[static_cast<std::size_t>(mm)];
    return std::conj(an) * std::conj(am) * moment(2 * n, 2 * mm) +
           std::conj(an) * am * moment(2 * n, 2 * mm + 1) +
           an * std::conj(am) * moment(2 * n + 1, 2 * mm) +
           an * am * moment(2 * n + 1, 2 * mm + 1);
  };

  const int ord0 = grid.ordinal(0, 0);
  const bool have0 = !out.masked[static_cast<std::size_t>(ord0)];
  for (int n = 0; n < m; ++n) {
    if (out.masked[static_cast<std::size_t>(n)]) continue;
    const double amp_n = std::abs(ao[static_cast<std::size_t>(n)]);
    const Complex auto_nn = entry(n, n);
    if (std::abs(auto_nn.imag()) > kImagResidueError * amp_n * amp_n)
      throw ConsistencyError("spectra_slices: imaginary residue on the diagonal");
    out.s_auto[static_cast<std::size_t>(n)] = auto_nn.real() / (amp_n * amp_n);
    if (have0) {
      const Complex sym = 0.5 * (entry(ord0, n) + entry(n, ord0));
      const double norm = std::abs(ao[static_cast<std::size_t>(ord0)]) * amp_n;
      if (std::abs(sym.imag()) > kImagResidueError * norm)
        throw ConsistencyError("spectra_slices: imaginary residue on the fundamental slice");
      out.s_cross0[static_cast<std::size_t>(n)] = sym.real() / norm;
    }
  }

  const double power = total_output_power(steady);
  if (!(power > 0.0)) throw DomainError("spectra_slices: zero total output power");
  Eigen::VectorXcd q(2 * m);
  for (int n = 0; n < m; ++n) {
    q(2 * n) = std::conj(ao[static_cast<std::size_t>(n)]);
    q(2 * n + 1) = ao[static_cast<std::size_t>(n)];
  }
  const auto [vac, thermal] = kernel.weighted_totals(q);
  const Complex total = vac + nt * thermal;
  if (std::abs(total.imag()) > kImagResidueError * std::max(1.0, std::abs(total.real())) * power)
    throw ConsistencyError("spectra_slices: imaginary residue in the total");
  out.s_total = total.real() / power;
  return out;
}

}  // namespace optocav
