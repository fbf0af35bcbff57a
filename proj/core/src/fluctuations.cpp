#include "optocav/fluctuations.hpp"

#include <cmath>

#include "optocav/errors.hpp"

namespace optocav {

namespace {

constexpr double kRcondFloor = 1e-12;
constexpr double kUpdateFloor = 1e-10;
constexpr Complex kI{0.0, 1.0};

// Rank-one right factor: pairs each column with its partner inside the
// (annihilation, creation) block and carries the mechanical susceptibility.
Eigen::VectorXcd coupling_vector(const Eigen::VectorXcd& drive, Complex chi) {
  const Eigen::Index n = drive.size();
  Eigen::VectorXcd w(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    w(c) = (c % 2 == 0) ? -kI * chi * drive(c + 1) : kI * chi * drive(c - 1);
  }
  return w;
}

Eigen::VectorXcd thermal_transfer(const FluctuationSystem& system, const Eigen::VectorXcd& fa) {
  const double scale = std::sqrt(2.0 * system.mirror_damping / system.mirror_freq);
  return scale * system.chi * fa;
}

void check_pair(int size_p, double omega_p, const Eigen::VectorXcd& drive_p, double power_p,
                int size_m, double omega_m, const Eigen::VectorXcd& drive_m, double power_m) {
  if (size_p != size_m)
    throw ConsistencyError("moment kernel: solution sizes differ");
  if (std::abs(omega_p + omega_m) > 1e-12 * std::max(1.0, std::abs(omega_p)))
    throw ConsistencyError("moment kernel: solutions are not at opposite frequencies");
  const double scale = std::max(1.0, drive_p.cwiseAbs().maxCoeff());
  if ((drive_p - drive_m).cwiseAbs().maxCoeff() > 1e-14 * scale ||
      std::abs(power_p - power_m) > 1e-14 * std::max(1.0, power_p))
    throw ConsistencyError("moment kernel: solutions come from different steady states");
}

}  // namespace

ResponseSample mirror_response(double omega, const ModelParams& params) {
  const double om2 = params.mirror_freq * params.mirror_freq;
  return {omega, om2 / Complex(om2 - omega * omega, params.mirror_damping * omega)};
}

FluctuationSystem assemble_system(const SteadyState& steady, const ModelParams& params,
                                  const ModeGrid& grid, double omega, AssemblyMode mode,
                                  int max_dense_size) {
  params.validate();
  const int m = grid.count();
  if (steady.amplitudes.size() != static_cast<std::size_t>(m))
    throw DomainError("assemble_system: steady state does not match the grid");

  FluctuationSystem sys;
  sys.omega = omega;
  sys.size = 2 * m;
  sys.intracavity_power = steady.intracavity_power;
  sys.chi = mirror_response(omega, params).chi;
  sys.mirror_freq = params.mirror_freq;
  sys.mirror_damping = params.mirror_damping;

  sys.drive.resize(sys.size);
  sys.detunings.resize(sys.size);
  sys.diagonal.resize(sys.size);
  const Complex base = Complex(1.0, omega);  // i Omega + 1
  for (int u = 0; u < m; ++u) {
    const Complex a = steady.amplitudes[static_cast<std::size_t>(u)];
    const double det = grid.detunings[static_cast<std::size_t>(u)];
    sys.drive(2 * u) = kI * a;
    sys.drive(2 * u + 1) = -kI * std::conj(a);
    sys.detunings(2 * u) = det;
    sys.detunings(2 * u + 1) = det;
    const Complex shift = kI * (sys.intracavity_power - det);
    sys.diagonal(2 * u) = base - shift;      // annihilation row
    sys.diagonal(2 * u + 1) = base + shift;  // creation row
  }
  sys.coupling = coupling_vector(sys.drive, sys.chi);

  if (mode == AssemblyMode::dense) {
    if (sys.size > max_dense_size)
      throw DomainError("assemble_system: size " + std::to_string(sys.size) +
                        " exceeds the dense cap " + std::to_string(max_dense_size) +
                        "; assemble matrix_free and use the fast solver");
    // Literal entry-by-entry assembly; the coupling block pairs column c with
    // the conjugate partner of its mode and flips sign with the column parity.
    Eigen::MatrixXcd t(sys.size, sys.size);
    for (int r = 0; r < sys.size; ++r) {
      for (int c = 0; c < sys.size; ++c) {
        const Complex partner = (c % 2 == 0) ? sys.drive(c + 1) : sys.drive(c - 1);
        const Complex sign = (c % 2 == 0) ? -kI : kI;
        t(r, c) = sign * sys.chi * sys.drive(r) * partner;
      }
      t(r, r) += sys.diagonal(r);
    }
    // the same block must be exactly the outer product drive * coupling^T
    double worst = 0.0;
    double scale = 1e-30;
    for (int r = 0; r < sys.size; ++r) {
      for (int c = 0; c < sys.size; ++c) {
        const Complex outer = sys.drive(r) * sys.coupling(c);
        const Complex lit = t(r, c) - (r == c ? sys.diagonal(r) : Complex{0.0, 0.0});
        worst = std::max(worst, std::abs(lit - outer));
        scale = std::max(scale, std::abs(lit));
      }
    }
    if (worst > 1e-14 * std::max(1.0, scale))
      throw ConsistencyError("assemble_system: rank-one decomposition does not reproduce "
                             "the coupling block");
    sys.matrix = std::move(t);
  }
  return sys;
}

DenseSolution solve_dense(const FluctuationSystem& system) {
  if (!system.matrix)
    throw DomainError("solve_dense: system was assembled matrix_free");
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(*system.matrix);
  const double rcond = lu.rcond();
  if (!(rcond > kRcondFloor))
    throw NumericalError("solve_dense: system matrix is ill-conditioned "
                         "(condition estimate " + std::to_string(1.0 / std::max(rcond, 1e-300)) +
                         ")");
  DenseSolution sol;
  sol.omega = system.omega;
  sol.intracavity_power = system.intracavity_power;
  sol.drive = system.drive;
  sol.F = lu.inverse();
  sol.B = 2.0 * sol.F - Eigen::MatrixXcd::Identity(system.size, system.size);
  sol.U = thermal_transfer(system, sol.F * system.drive);
  return sol;
}

FastSolution solve_fast(const FluctuationSystem& system) {
  FastSolution sol;
  sol.omega = system.omega;
  sol.intracavity_power = system.intracavity_power;
  sol.drive = system.drive;
  sol.u = system.drive.cwiseQuotient(system.diagonal);
  sol.v = system.coupling.cwiseQuotient(system.diagonal);
  sol.b_diag = (2.0 * system.diagonal.cwiseInverse()).array() - 1.0;
  sol.denominator = Complex{1.0, 0.0} + (system.coupling.array() * sol.u.array()).sum();

  if (std::abs(sol.denominator) < kUpdateFloor) {
    // Near-singular rank-one update; the dense factorization is the honest
    // answer here (it carries its own conditioning guard).
    FluctuationSystem dense_sys = system;
    if (!dense_sys.matrix) {
      Eigen::MatrixXcd t = system.drive * system.coupling.transpose();
      t.diagonal() += system.diagonal;
      dense_sys.matrix = std::move(t);
    }
    sol.dense_fallback = std::make_shared<const DenseSolution>(solve_dense(dense_sys));
    sol.gain = Complex{0.0, 0.0};
    sol.U = sol.dense_fallback->U;
    return sol;
  }

  sol.gain = 2.0 / sol.denominator;
  sol.U = thermal_transfer(system, sol.u / sol.denominator);  // F a = u / (1 + w.u)
  return sol;
}

Complex FastSolution::b_entry(int r, int c) const {
  if (dense_fallback) return dense_fallback->B(r, c);
  Complex val = -gain * u(r) * v(c);
  if (r == c) val += b_diag(r);
  return val;
}

Eigen::VectorXcd FastSolution::b_row(int r) const {
  if (dense_fallback) return dense_fallback->B.row(r).transpose();
  Eigen::VectorXcd row = (-gain * u(r)) * v;
  row(r) += b_diag(r);
  return row;
}

Eigen::VectorXcd FastSolution::apply_b(const Eigen::VectorXcd& x) const {
  if (dense_fallback) return dense_fallback->B * x;
  const Complex vx = (v.array() * x.array()).sum();
  return b_diag.cwiseProduct(x) - (gain * vx) * u;
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

DenseMomentKernel::DenseMomentKernel(const DenseSolution& plus, const DenseSolution& minus)
    : DenseMomentKernel(plus.B, plus.U, minus.B, minus.U, plus.omega) {
  check_pair(static_cast<int>(plus.B.rows()), plus.omega, plus.drive, plus.intracavity_power,
             static_cast<int>(minus.B.rows()), minus.omega, minus.drive,
             minus.intracavity_power);
}

DenseMomentKernel::DenseMomentKernel(Eigen::MatrixXcd b_plus, Eigen::VectorXcd thermal_plus,
                                     Eigen::MatrixXcd b_minus, Eigen::VectorXcd thermal_minus,
                                     double omega)
    : MomentKernel(static_cast<int>(b_plus.rows()), omega),
      b_plus_(std::move(b_plus)),
      b_minus_(std::move(b_minus)),
      thermal_plus_(std::move(thermal_plus)),
      thermal_minus_(std::move(thermal_minus)) {
  const int n = size_;
  const int m = n / 2;
  Eigen::MatrixXcd even_cols(n, m), odd_cols(n, m);
  for (int u = 0; u < m; ++u) {
    even_cols.col(u) = b_plus_.col(2 * u);
    odd_cols.col(u) = b_minus_.col(2 * u + 1);
  }
  vac_.noalias() = even_cols * odd_cols.transpose();
}

std::pair<Complex, Complex> DenseMomentKernel::weighted_totals(const Eigen::VectorXcd& q) const {
  const Eigen::VectorXcd yp = b_plus_.transpose() * q;
  const Eigen::VectorXcd ym = b_minus_.transpose() * q;
  Complex vac{0.0, 0.0};
  for (int u = 0; u < size_ / 2; ++u) vac += yp(2 * u) * ym(2 * u + 1);
  const Complex tp = (q.array() * thermal_plus_.array()).sum();
  const Complex tm = (q.array() * thermal_minus_.array()).sum();
  return {vac, tp * tm};
}

FastMomentKernel::FastMomentKernel(const FastSolution& plus, const FastSolution& minus)
    : MomentKernel(plus.size(), plus.omega) {
  check_pair(plus.size(), plus.omega, plus.drive, plus.intracavity_power, minus.size(),
             minus.omega, minus.drive, minus.intracavity_power);
  if (plus.dense_fallback || minus.dense_fallback) {
    const int n = plus.size();
    Eigen::MatrixXcd bp(n, n), bm(n, n);
    for (int r = 0; r < n; ++r) {
      bp.row(r) = plus.b_row(r).transpose();
      bm.row(r) = minus.b_row(r).transpose();
    }
    fallback_ = std::make_unique<DenseMomentKernel>(std::move(bp), plus.U, std::move(bm),
                                                    minus.U, plus.omega);
    return;
  }
  bp_ = plus.b_diag;
  up_ = plus.u;
  vp_ = plus.v;
  gp_ = plus.gain;
  bm_ = minus.b_diag;
  um_ = minus.u;
  vm_ = minus.v;
  gm_ = minus.gain;
  thermal_plus_ = plus.U;
  thermal_minus_ = minus.U;
  sigma_ = Complex{0.0, 0.0};
  for (int u = 0; u < size_ / 2; ++u) sigma_ += vp_(2 * u) * vm_(2 * u + 1);
}

Complex FastMomentKernel::vacuum(int r, int s) const {
  if (fallback_) return fallback_->vacuum(r, s);
  // contraction of row r at +Omega (even columns) with row s at -Omega (odd
  // columns); each row is diagonal-plus-rank-one, so four closed-form terms
  Complex val = gp_ * gm_ * up_(r) * um_(s) * sigma_;
  if (r % 2 == 0) {
    val -= bp_(r) * gm_ * um_(s) * vm_(r + 1);
    if (s == r + 1) val += bp_(r) * bm_(s);
  }
  if (s % 2 == 1) val -= gp_ * up_(r) * bm_(s) * vp_(s - 1);
  return val;
}

Complex FastMomentKernel::thermal(int r, int s) const {
  if (fallback_) return fallback_->thermal(r, s);
  return thermal_plus_(r) * thermal_minus_(s);
}

std::pair<Complex, Complex> FastMomentKernel::weighted_totals(const Eigen::VectorXcd& q) const {
  if (fallback_) return fallback_->weighted_totals(q);
  const Complex uq_p = (up_.array() * q.array()).sum();
  const Complex uq_m = (um_.array() * q.array()).sum();
  const Eigen::VectorXcd yp = bp_.cwiseProduct(q) - (gp_ * uq_p) * vp_;
  const Eigen::VectorXcd ym = bm_.cwiseProduct(q) - (gm_ * uq_m) * vm_;
  Complex vac{0.0, 0.0};
  for (int u = 0; u < size_ / 2; ++u) vac += yp(2 * u) * ym(2 * u + 1);
  const Complex tp = (q.array() * thermal_plus_.array()).sum();
  const Complex tm = (q.array() * thermal_minus_.array()).sum();
  return {vac, tp * tm};
}

}  // namespace optocav
