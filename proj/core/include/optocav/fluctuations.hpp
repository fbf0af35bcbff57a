#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <utility>

#include "optocav/model.hpp"
#include "optocav/steady_state.hpp"

namespace optocav {

struct ResponseSample {
  double omega = 0.0;
  Complex chi;  // omega_m^2 / (omega_m^2 - Omega^2 + i gamma_m Omega)
};

/// Mechanical susceptibility of the damped mirror. chi(0) = 1 exactly and
/// chi(-Omega) = conj(chi(Omega)).
ResponseSample mirror_response(double omega, const ModelParams& params);

enum class AssemblyMode { dense, matrix_free };

/// Linearized fluctuation system at one analysis frequency. Rows come in
/// (annihilation, creation) pairs per mode: row 2u is the annihilation
/// component of the mode with ordinal u, row 2u+1 the creation component
/// (mode ordinal u has flat index 2u). The system matrix is
///   T = diag(diagonal) + drive * coupling^T,
/// i.e. mode-diagonal plus a rank-one mirror-mediated coupling; `matrix`
/// holds the dense T when assembled in dense mode.
struct FluctuationSystem {
  double omega = 0.0;
  int size = 0;  // 2 * mode count
  double intracavity_power = 0.0;
  Complex chi;
  double mirror_freq = 0.0;
  double mirror_damping = 0.0;
  Eigen::VectorXcd drive;      // (i alpha_n, -i conj(alpha_n)) interleaved
  Eigen::VectorXd detunings;   // per-row detuning (each mode duplicated)
  Eigen::VectorXcd diagonal;   // (i Omega + 1) + i s_r (P - detuning_r), s_r = (-1)^(r+1) 0-based
  Eigen::VectorXcd coupling;   // rank-one right factor (susceptibility folded in)
  std::optional<Eigen::MatrixXcd> matrix;
};

/// Builds the system around a steady state. In dense mode the full matrix is
/// materialized entry by entry and cross-checked against the rank-one
/// decomposition (ConsistencyError on mismatch); matrix_free keeps vectors
/// only. Dense assembly refuses sizes above max_dense_size.
///
/// The linearization is meaningful on a stable branch; that is the caller's
/// responsibility and is deliberately not enforced here (working points near
/// a fold are routinely probed).
FluctuationSystem assemble_system(const SteadyState& steady, const ModelParams& params,
                                  const ModeGrid& grid, double omega,
                                  AssemblyMode mode = AssemblyMode::dense,
                                  int max_dense_size = 8192);

/// Direct solution: F = T^{-1} by LU, B = 2F - I (input-output transfer),
/// U = sqrt(2 gamma_m / omega_m) chi F drive (thermal-force transfer).
struct DenseSolution {
  double omega = 0.0;
  double intracavity_power = 0.0;
  Eigen::VectorXcd drive;
  Eigen::MatrixXcd F;
  Eigen::MatrixXcd B;
  Eigen::VectorXcd U;
};

/// Throws DomainError when the system lacks its dense matrix and
/// NumericalError when the factorization reports a reciprocal condition
/// number below 1e-12.
DenseSolution solve_dense(const FluctuationSystem& system);

/// Implicit solution through the Sherman-Morrison update of the diagonal:
///   F = D^{-1} - (D^{-1} a)(w^T D^{-1}) / (1 + w^T D^{-1} a),
/// stored as B = diag(b_diag) - gain * u v^T with u = D^{-1} a, v = D^{-1} w,
/// gain = 2 / (1 + w.u). Row extraction, application and the spectra
/// contractions all cost O(N).
struct FastSolution {
  double omega = 0.0;
  double intracavity_power = 0.0;
  Eigen::VectorXcd drive;
  Eigen::VectorXcd b_diag;  // 2 / d_r - 1
  Eigen::VectorXcd u;
  Eigen::VectorXcd v;
  Complex gain{0.0, 0.0};
  Complex denominator{1.0, 0.0};
  Eigen::VectorXcd U;
  /// Present when |denominator| fell below 1e-10 and the solve was redone
  /// densely; all accessors then answer from the fallback.
  std::shared_ptr<const DenseSolution> dense_fallback;

  int size() const { return static_cast<int>(b_diag.size()); }
  Complex b_entry(int r, int c) const;
  Eigen::VectorXcd b_row(int r) const;
  Eigen::VectorXcd apply_b(const Eigen::VectorXcd& x) const;
};

FastSolution solve_fast(const FluctuationSystem& system);

// ---------------------------------------------------------------------------
// Output-moment contractions across a (+Omega, -Omega) solution pair.
// ---------------------------------------------------------------------------

/// Second moments of the output field need products of transfer rows at
/// +Omega against transfer rows at -Omega. Only the (annihilation, creation)
/// input pairing survives in vacuum, so
///   vacuum(r, s)  = sum_u B+[r, 2u] B-[s, 2u+1],
///   thermal(r, s) = U+[r] U-[s]           (weight = thermal occupation).
class MomentKernel {
 public:
  virtual ~MomentKernel() = default;

  int size() const { return size_; }
  double omega() const { return omega_; }

  virtual Complex vacuum(int r, int s) const = 0;
  virtual Complex thermal(int r, int s) const = 0;

  /// (vacuum, thermal) totals of the bilinear form sum_{r,s} q_r q_s M(r, s):
  /// one pass instead of size^2 entry evaluations.
  virtual std::pair<Complex, Complex> weighted_totals(const Eigen::VectorXcd& q) const = 0;

 protected:
  MomentKernel(int size, double omega) : size_(size), omega_(omega) {}
  int size_ = 0;
  double omega_ = 0.0;
};

/// Kernel over two dense solutions; precomputes the full vacuum contraction
/// matrix. Throws ConsistencyError unless the two solutions come from the
/// same steady state at opposite frequencies.
class DenseMomentKernel final : public MomentKernel {
 public:
  DenseMomentKernel(const DenseSolution& plus, const DenseSolution& minus);
  /// Raw-matrix constructor, used when a fast solution had to fall back.
  DenseMomentKernel(Eigen::MatrixXcd b_plus, Eigen::VectorXcd thermal_plus,
                    Eigen::MatrixXcd b_minus, Eigen::VectorXcd thermal_minus, double omega);

  Complex vacuum(int r, int s) const override { return vac_(r, s); }
  Complex thermal(int r, int s) const override { return thermal_plus_(r) * thermal_minus_(s); }
  std::pair<Complex, Complex> weighted_totals(const Eigen::VectorXcd& q) const override;

 private:
  Eigen::MatrixXcd vac_;
  Eigen::MatrixXcd b_plus_, b_minus_;  // kept for the weighted totals
  Eigen::VectorXcd thermal_plus_, thermal_minus_;
};

/// Kernel over two fast solutions; every entry is O(1) after an O(N) setup.
/// Falls back to dense contraction arithmetic when either side carries a
/// dense fallback.
class FastMomentKernel final : public MomentKernel {
 public:
  FastMomentKernel(const FastSolution& plus, const FastSolution& minus);

  Complex vacuum(int r, int s) const override;
  Complex thermal(int r, int s) const override;
  std::pair<Complex, Complex> weighted_totals(const Eigen::VectorXcd& q) const override;

 private:
  Eigen::VectorXcd bp_, up_, vp_;  // +Omega rank-one pieces
  Eigen::VectorXcd bm_, um_, vm_;  // -Omega rank-one pieces
  Complex gp_{0.0, 0.0}, gm_{0.0, 0.0};
  Complex sigma_{0.0, 0.0};  // sum_u vp[2u] vm[2u+1]
  Eigen::VectorXcd thermal_plus_, thermal_minus_;
  std::unique_ptr<DenseMomentKernel> fallback_;
};

}  // namespace optocav
