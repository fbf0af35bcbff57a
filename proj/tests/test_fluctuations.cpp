#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "optocav/fluctuations.hpp"

using namespace optocav;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

// A pumped working point on the lower branch, at slightly randomized parameters.
struct Draw {
  ModelParams params;
  ModeGrid grid;
  SteadyState steady;
};

Draw random_draw(std::mt19937& rng, int half_extent) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ModelParams p;
  p.detuning0 = 0.5 + 2.0 * u(rng);
  p.mirror_freq = 2.0 + 18.0 * u(rng);
  p.mirror_damping = p.mirror_freq / std::pow(10.0, 2.0 + 4.0 * u(rng));
  ModeGrid grid = build_grid(p, half_extent, 8.0 * kPi);
  const double P = 0.1 + 0.5 * u(rng);
  SteadyState st = steady_state_at(P, p, grid);
  return {std::move(p), std::move(grid), std::move(st)};
}

SteadyState dark_state(const ModelParams& params, const ModeGrid& grid) {
  return steady_state_from_pump(std::vector<Complex>(grid.count(), Complex{0.0, 0.0}), 0.0,
                                params, grid);
}

// pairwise swap of (annihilation, creation) rows/columns
Eigen::MatrixXcd pair_swap(const Eigen::MatrixXcd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXcd out(n, n);
  auto sw = [](Eigen::Index i) { return i % 2 == 0 ? i + 1 : i - 1; };
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) out(r, c) = m(sw(r), sw(c));
  return out;
}

Eigen::MatrixXd commutator_metric(int n) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n / 2; ++i) {
    k(2 * i, 2 * i + 1) = 1.0;
    k(2 * i + 1, 2 * i) = -1.0;
  }
  return k;
}

}  // namespace

TEST_SUITE("fluctuations") {

TEST_CASE("mirror_response: static limit, resonance, conjugation") {
  ModelParams p;
  p.mirror_freq = 7.0;
  p.mirror_damping = 0.014;
  CHECK(mirror_response(0.0, p).chi == Complex{1.0, 0.0});  // exact

  const Complex at_res = mirror_response(p.mirror_freq, p).chi;
  const Complex expected = p.mirror_freq / (kI * p.mirror_damping);
  CHECK(std::abs(at_res - expected) < 1e-12 * std::abs(expected));
  CHECK(std::abs(at_res) == doctest::Approx(p.quality_factor()).epsilon(1e-12));

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int i = 0; i < 100; ++i) {
    const double om = u(rng);
    CHECK(std::abs(mirror_response(-om, p).chi - std::conj(mirror_response(om, p).chi)) <
          1e-15 * std::abs(mirror_response(om, p).chi));
  }
}

TEST_CASE("dark cavity assembles to a pure diagonal") {
  ModelParams p;
  p.detuning0 = 1.2;
  const ModeGrid grid = build_grid(p, 1, 8.0 * kPi);
  const double omega = 0.37;
  const FluctuationSystem sys = assemble_system(dark_state(p, grid), p, grid, omega);
  REQUIRE(sys.matrix.has_value());
  for (int r = 0; r < sys.size; ++r) {
    for (int c = 0; c < sys.size; ++c) {
      if (r == c) continue;
      CHECK(std::abs((*sys.matrix)(r, c)) == 0.0);
    }
    const double det = sys.detunings(r);
    const Complex want = r % 2 == 0 ? Complex(1.0, omega + det) : Complex(1.0, omega - det);
    CHECK(std::abs((*sys.matrix)(r, r) - want) < 1e-15);
  }
}

TEST_CASE("single-mode system matches the hand-built 2x2 matrix") {
  ModelParams p;
  p.detuning0 = 1.8;
  p.mirror_freq = 6.0;
  p.mirror_damping = 0.03;
  const ModeGrid grid = build_grid(p, 0, 8.0 * kPi);

  const Complex alpha{0.6, -0.45};
  const double P = std::norm(alpha);
  std::vector<Complex> pump{alpha * Complex(1.0, p.detuning0 - P)};
  const SteadyState st = steady_state_from_pump(pump, P, p, grid);

  const double omega = 0.21;
  const FluctuationSystem sys = assemble_system(st, p, grid, omega);
  REQUIRE(sys.size == 2);
  REQUIRE(sys.matrix.has_value());

  const Complex chi = mirror_response(omega, p).chi;
  const Complex d_plus = Complex(1.0, omega) + kI * (p.detuning0 - P);
  const Complex d_minus = Complex(1.0, omega) - kI * (p.detuning0 - P);
  Eigen::MatrixXcd expected(2, 2);
  expected(0, 0) = d_plus - kI * chi * std::norm(alpha);
  expected(0, 1) = -kI * chi * alpha * alpha;
  expected(1, 0) = kI * chi * std::conj(alpha) * std::conj(alpha);
  expected(1, 1) = d_minus + kI * chi * std::norm(alpha);
  CHECK((*sys.matrix - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("coupling block is exactly rank one") {
  std::mt19937 rng(23);
  const Draw d = random_draw(rng, 2);
  const FluctuationSystem sys = assemble_system(d.steady, d.params, d.grid, 0.13);
  REQUIRE(sys.matrix.has_value());
  double worst = 0.0;
  for (int r = 0; r < sys.size; ++r)
    for (int c = 0; c < sys.size; ++c) {
      const Complex coupling =
          (*sys.matrix)(r, c) - (r == c ? sys.diagonal(r) : Complex{0.0, 0.0});
      worst = std::max(worst, std::abs(coupling - sys.drive(r) * sys.coupling(c)));
    }
  CHECK(worst < 1e-14);
}

TEST_CASE("assemble_system guards") {
  std::mt19937 rng(29);
  const Draw d = random_draw(rng, 2);
  CHECK_THROWS_AS(assemble_system(d.steady, d.params, d.grid, 0.1, AssemblyMode::dense,
                                  /*max_dense_size=*/10),
                  DomainError);
  CHECK_FALSE(
      assemble_system(d.steady, d.params, d.grid, 0.1, AssemblyMode::matrix_free).matrix);
}

TEST_CASE("dense solve on the dark cavity: unimodular diagonal transfer") {
  ModelParams p;
  p.detuning0 = 0.9;
  const ModeGrid grid = build_grid(p, 1, 8.0 * kPi);
  const double omega = 0.42;
  const DenseSolution sol = solve_dense(assemble_system(dark_state(p, grid), p, grid, omega));

  for (int r = 0; r < sol.B.rows(); ++r) {
    for (int c = 0; c < sol.B.cols(); ++c) {
      if (r != c) CHECK(std::abs(sol.B(r, c)) == 0.0);
    }
    const double det = grid.detunings[r / 2];
    const double s = r % 2 == 0 ? 1.0 : -1.0;
    const Complex closed = (Complex(1.0, -(omega + s * det))) / Complex(1.0, omega + s * det);
    CHECK(std::abs(sol.B(r, r) - closed) < 1e-14);
    CHECK(std::abs(std::abs(sol.B(r, r)) - 1.0) < 1e-14);
  }
  CHECK(sol.U.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dense solve inverts the system matrix") {
  std::mt19937 rng(31);
  const Draw d = random_draw(rng, 1);
  const FluctuationSystem sys = assemble_system(d.steady, d.params, d.grid, 0.08);
  const DenseSolution sol = solve_dense(sys);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(sys.size, sys.size);
  CHECK((sol.F * (*sys.matrix) - id).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((sol.B - (2.0 * sol.F - id)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dense solve rejects a singular system") {
  std::mt19937 rng(37);
  const Draw d = random_draw(rng, 0);
  FluctuationSystem sys = assemble_system(d.steady, d.params, d.grid, 0.1);
  sys.matrix->setZero();
  CHECK_THROWS_AS(solve_dense(sys), NumericalError);
  FluctuationSystem free_sys = assemble_system(d.steady, d.params, d.grid, 0.1,
                                               AssemblyMode::matrix_free);
  CHECK_THROWS_AS(solve_dense(free_sys), DomainError);
}

TEST_CASE("fast solve agrees with the dense solution") {
  std::mt19937 rng(41);
  for (int half_extent : {0, 1, 3}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Draw d = random_draw(rng, half_extent);
      const double omega = 0.02 + 0.2 * trial;
      const FluctuationSystem sys = assemble_system(d.steady, d.params, d.grid, omega);
      const DenseSolution dense = solve_dense(sys);
      const FastSolution fast = solve_fast(sys);
      CHECK(!fast.dense_fallback);

      const double scale = dense.B.cwiseAbs().maxCoeff();
      for (int r = 0; r < sys.size; ++r) {
        CHECK((fast.b_row(r).transpose() - dense.B.row(r)).cwiseAbs().maxCoeff() <
              1e-10 * scale);
      }
      CHECK((fast.U - dense.U).cwiseAbs().maxCoeff() <
            1e-10 * std::max(1e-300, dense.U.cwiseAbs().maxCoeff()));

      Eigen::VectorXcd x(sys.size);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (int i = 0; i < sys.size; ++i) x(i) = Complex(u(rng), u(rng));
      CHECK((fast.apply_b(x) - dense.B * x).cwiseAbs().maxCoeff() < 1e-10 * scale);
      CHECK(std::abs(fast.b_entry(1, 0) - dense.B(1, 0)) < 1e-12 * scale);
    }
  }
}

TEST_CASE("fast solve on the dark cavity is a pure diagonal") {
  ModelParams p;
  const ModeGrid grid = build_grid(p, 1, 8.0 * kPi);
  const FastSolution sol =
      solve_fast(assemble_system(dark_state(p, grid), p, grid, 0.3, AssemblyMode::matrix_free));
  CHECK(!sol.dense_fallback);
  CHECK(sol.u.cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(sol.denominator - 1.0) == 0.0);
  CHECK(std::abs(sol.b_entry(0, 1)) == 0.0);
  CHECK(std::abs(sol.b_entry(0, 0) - sol.b_diag(0)) == 0.0);
}

TEST_CASE("near-singular rank-one update falls back to the dense path") {
  // At zero analysis frequency with detuning - P = 1, the update denominator
  // is exactly 1 - P, so P near one pushes it under the floor.
  ModelParams p;
  p.mirror_freq = 5.0;
  p.mirror_damping = 0.05;
  auto make_system = [&](double P) {
    p.detuning0 = P + 1.0;
    const ModeGrid grid = build_grid(p, 0, 8.0 * kPi);
    const Complex alpha = std::sqrt(P);
    std::vector<Complex> pump{alpha * Complex(1.0, p.detuning0 - P)};
    const SteadyState st = steady_state_from_pump(pump, P, p, grid);
    return assemble_system(st, p, grid, 0.0);
  };

  const FluctuationSystem nearly = make_system(1.0 - 8e-11);
  const FastSolution sol = solve_fast(nearly);
  REQUIRE(sol.dense_fallback);
  const DenseSolution direct = solve_dense(nearly);
  CHECK((sol.b_row(0).transpose() - direct.B.row(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sol.U - direct.U).cwiseAbs().maxCoeff() == 0.0);

  // exactly singular: even the dense fallback must refuse
  CHECK_THROWS_AS(solve_fast(make_system(1.0)), NumericalError);
}

TEST_CASE("conjugation symmetry links the two analysis frequencies") {
  std::mt19937 rng(43);
  for (int trial = 0; trial < 6; ++trial) {
    const Draw d = random_draw(rng, 1);
    const double omega = 0.05 + 0.11 * trial;
    const DenseSolution plus = solve_dense(assemble_system(d.steady, d.params, d.grid, omega));
    const DenseSolution minus = solve_dense(assemble_system(d.steady, d.params, d.grid, -omega));
    const double scale = plus.B.cwiseAbs().maxCoeff();
    CHECK((minus.B - pair_swap(plus.B.conjugate())).cwiseAbs().maxCoeff() < 1e-12 * scale);
  }
}

TEST_CASE("commutators survive the zero-frequency transfer") {
  std::mt19937 rng(47);
  const Draw d = random_draw(rng, 1);
  const DenseSolution sol = solve_dense(assemble_system(d.steady, d.params, d.grid, 0.0));
  const Eigen::MatrixXd k = commutator_metric(static_cast<int>(sol.B.rows()));
  CHECK((sol.B * k * sol.B.transpose() - k).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("flat pump couples only the fundamental pair") {
  ModelParams p;
  const ModeGrid grid = build_grid(p, 2, 8.0 * kPi);
  const int o0 = grid.ordinal(0, 0);
  std::vector<Complex> pump(grid.count(), Complex{0.0, 0.0});
  const Complex alpha{0.7, 0.2};
  const double P = std::norm(alpha);
  pump[o0] = alpha * Complex(1.0, grid.detunings[o0] - P);
  const SteadyState st = steady_state_from_pump(pump, P, p, grid);

  const DenseSolution sol = solve_dense(assemble_system(st, p, grid, 0.1));
  for (int r = 0; r < sol.B.rows(); ++r) {
    for (int c = 0; c < sol.B.cols(); ++c) {
      const bool in_pair_r = r / 2 == o0;
      const bool in_pair_c = c / 2 == o0;
      if (r == c || (in_pair_r && in_pair_c)) continue;
      CHECK(std::abs(sol.B(r, c)) == 0.0);
    }
  }
}

TEST_CASE("moment kernels reject mismatched solution pairs") {
  std::mt19937 rng(53);
  const Draw d = random_draw(rng, 0);
  const DenseSolution plus = solve_dense(assemble_system(d.steady, d.params, d.grid, 0.1));
  const DenseSolution also_plus = solve_dense(assemble_system(d.steady, d.params, d.grid, 0.1));
  CHECK_THROWS_AS(DenseMomentKernel(plus, also_plus), ConsistencyError);

  const SteadyState other = steady_state_at(d.steady.intracavity_power + 0.05, d.params, d.grid);
  const DenseSolution minus_other =
      solve_dense(assemble_system(other, d.params, d.grid, -0.1));
  CHECK_THROWS_AS(DenseMomentKernel(plus, minus_other), ConsistencyError);
}

}  // TEST_SUITE
