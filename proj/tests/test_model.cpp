#include <doctest.h>

#include <cmath>
#include <numbers>

#include "optocav/config.hpp"
#include "optocav/model.hpp"

using namespace optocav;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_SUITE("model") {

TEST_CASE("coupling_from_physical evaluates the defining formula") {
  PhysicalParams p{1.0, 1.0, 1.0, 1.0};
  CHECK(coupling_from_physical(p, 1.0) == doctest::Approx(1.0).epsilon(1e-15));

  // explicit scalings: doubling the length halves g, quadrupling the mass halves g
  PhysicalParams base{2.0, 3.0, 0.5, 7.0};
  const double g0 = coupling_from_physical(base, 1.0);
  PhysicalParams longer = base;
  longer.cavity_length *= 2.0;
  CHECK(coupling_from_physical(longer, 1.0) == doctest::Approx(g0 / 2.0).epsilon(1e-14));
  PhysicalParams heavier = base;
  heavier.mirror_mass *= 4.0;
  CHECK(coupling_from_physical(heavier, 1.0) == doctest::Approx(g0 / 2.0).epsilon(1e-14));
}

TEST_CASE("coupling_from_physical on laboratory numbers") {
  // 282 THz light, 1 cm cavity, 10 mg mirror at 10 kHz
  PhysicalParams p;
  p.optical_freq = 2.0 * kPi * 2.82e14;
  p.cavity_length = 0.01;
  p.mirror_mass = 1e-5;
  p.mirror_freq = 2.0 * kPi * 1e4;
  const double g = coupling_from_physical(p, 1.0546e-34);
  CHECK(g == doctest::Approx(2.2955297521858657).epsilon(1e-12));
}

TEST_CASE("coupling_from_physical rejects non-positive inputs") {
  PhysicalParams p{1.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(coupling_from_physical(p, 0.0), DomainError);
  p.mirror_mass = -1.0;
  CHECK_THROWS_AS(coupling_from_physical(p, 1.0), DomainError);
  p = {1.0, 0.0, 1.0, 1.0};
  CHECK_THROWS_AS(coupling_from_physical(p, 1.0), DomainError);
}

TEST_CASE("physical_warnings flags a slow optical scale") {
  PhysicalParams p{1.0, 1.0, 1.0, 1.0};
  p.optical_freq = 999.0;
  CHECK(!physical_warnings(p).empty());
  p.optical_freq = 1e6;
  CHECK(physical_warnings(p).empty());
}

TEST_CASE("ModelParams validation") {
  ModelParams ok;
  CHECK_NOTHROW(ok.validate());

  ModelParams p = ok;
  p.mirror_freq = 0.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = ok;
  p.mirror_damping = -1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = ok;
  p.pump_waist = 0.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = ok;
  p.thermal_occupation = -0.5;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = ok;
  p.thermal_occupation = 0.0;
  CHECK_NOTHROW(p.validate());
  p = ok;
  p.coupling = 0.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  // quality factor must exceed one
  p = ok;
  p.mirror_damping = p.mirror_freq;
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("build_grid degenerate and reference lattices") {
  ModelParams params;

  const ModeGrid g0 = build_grid(params, 0, 8.0 * kPi);
  CHECK(g0.count() == 1);
  CHECK(g0.indices[0].nx == 0);
  CHECK(g0.indices[0].ny == 0);
  CHECK(g0.k_squared[0] == 0.0);
  CHECK(g0.detunings[0] == params.detuning0);

  const ModeGrid g9 = build_grid(params, 9, 8.0 * kPi);
  CHECK(g9.count() == 361);  // 19 x 19

  const int ord10 = g9.ordinal(1, 0);
  CHECK(g9.k_squared[ord10] == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(g9.detunings[ord10] == doctest::Approx(params.detuning0 + 0.0625).epsilon(1e-15));
  const auto k = g9.wavevector(ord10);
  CHECK(std::hypot(k[0], k[1]) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("build_grid invariants: detuning floor and symmetry") {
  ModelParams params;
  params.detuning0 = 1.3;
  const ModeGrid g = build_grid(params, 4, 8.0 * kPi);
  for (int n = 0; n < g.count(); ++n) {
    const auto& m = g.indices[n];
    CHECK(g.detunings[n] >= params.detuning0);
    if (m.nx != 0 || m.ny != 0) CHECK(g.detunings[n] > params.detuning0);
    CHECK(g.detunings[n] == g.detunings[g.ordinal(-m.nx, -m.ny)]);
    CHECK(g.detunings[n] == g.detunings[g.ordinal(m.ny, m.nx)]);
  }
}

TEST_CASE("build_grid errors and aliasing warning") {
  ModelParams params;
  CHECK_THROWS_AS(build_grid(params, 2, 0.0), DomainError);
  CHECK_THROWS_AS(build_grid(params, 2, -1.0), DomainError);
  CHECK_THROWS_AS(build_grid(params, -1, 8.0), DomainError);
  CHECK(build_grid(params, 2, 3.0 * params.pump_waist).warnings.size() == 1);
  CHECK(build_grid(params, 2, 8.0 * params.pump_waist).warnings.empty());
}

TEST_CASE("flat indices are even, in range, and round-trip") {
  ModelParams params;
  const ModeGrid g = build_grid(params, 3, 8.0 * kPi);
  const int side = g.side();
  for (int n = 0; n < g.count(); ++n) {
    const ModeIndex& m = g.indices[n];
    CHECK(m.flat == 2 * side * (m.ny + g.half_extent) + 2 * (m.nx + g.half_extent));
    CHECK(m.flat % 2 == 0);
    CHECK(m.flat >= 0);
    CHECK(m.flat <= 2 * g.count() - 2);
    const ModeIndex back = g.mode_of_flat(m.flat);
    CHECK(back.nx == m.nx);
    CHECK(back.ny == m.ny);
  }
  CHECK_THROWS_AS(g.mode_of_flat(1), DomainError);
  CHECK_THROWS_AS(g.mode_of_flat(2 * g.count()), DomainError);
  CHECK_THROWS_AS(g.ordinal(4, 0), DomainError);
}

TEST_CASE("pump_components: fundamental value and Gaussian falloff") {
  ModelParams params;
  params.pump_amplitude = 1.3;
  params.pump_waist = 2.0;
  const double l = 8.0 * kPi;
  const ModeGrid g = build_grid(params, 9, l);
  const auto e = pump_components(params, g);

  const double e0 = params.pump_amplitude * std::sqrt(2.0 * kPi) * params.pump_waist / l;
  CHECK(e[g.ordinal(0, 0)].real() == doctest::Approx(e0).epsilon(1e-14));
  CHECK(e[g.ordinal(0, 0)].imag() == 0.0);

  // (w_p/2)^2 |k|^2 = 0.25 for mode (2, 0) on this box
  const double ratio = e[g.ordinal(2, 0)].real() / e[g.ordinal(0, 0)].real();
  CHECK(ratio == doctest::Approx(std::exp(-0.25)).epsilon(1e-14));

  for (int n = 0; n < g.count(); ++n) {
    const auto& m = g.indices[n];
    CHECK(e[n].real() > 0.0);
    CHECK(e[n].real() <= e[g.ordinal(0, 0)].real());
    CHECK(e[n] == e[g.ordinal(-m.nx, -m.ny)]);
    CHECK(e[n] == e[g.ordinal(m.ny, m.nx)]);
  }
}

TEST_CASE("pump Parseval sum captures the input power") {
  ModelParams params;
  params.pump_amplitude = 1.7;
  params.pump_waist = 2.0;
  const ModeGrid g = build_grid(params, 9, 8.0 * kPi);
  const auto e = pump_components(params, g);
  double sum = 0.0;
  for (const Complex& en : e) sum += std::norm(en);
  const double ratio = sum / (params.pump_amplitude * params.pump_amplitude);
  CHECK(ratio >= 0.99);
  CHECK(ratio <= 1.0 + 1e-12);
}

TEST_CASE("config parsing: defaults, full file, comments") {
  const Configuration d = parse_config_text("");
  CHECK(d.half_extent == kDefaultHalfExtent);
  CHECK(d.box_side == doctest::Approx(8.0 * kPi).epsilon(1e-15));
  CHECK(d.model.detuning0 == 2.0);

  const Configuration c = parse_config_text(
      "# reference run\n"
      "detuning0 = 1.5\n"
      "mirror_freq = 20 # trailing comment\n"
      "mirror_damping = 2e-5\n"
      "coupling = 0.5\n"
      "thermal_occupation = 1e5\n"
      "pump_amplitude = 2.0\n"
      "pump_waist = 1.5\n"
      "half_extent = 4\n"
      "box_side = 12.0\n"
      "\n");
  CHECK(c.model.detuning0 == 1.5);
  CHECK(c.model.mirror_freq == 20.0);
  CHECK(c.model.mirror_damping == 2e-5);
  CHECK(c.model.coupling == 0.5);
  CHECK(c.model.thermal_occupation == 1e5);
  CHECK(c.model.pump_amplitude == 2.0);
  CHECK(c.model.pump_waist == 1.5);
  CHECK(c.half_extent == 4);
  CHECK(c.box_side == 12.0);
}

TEST_CASE("config parsing: errors carry line numbers") {
  try {
    parse_config_text("detuning0 = 1\nbogus_key = 3\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_config_text("detuning0 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("detuning0 = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("half_extent = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("= 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("detuning0 =\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("detuning0 = 1\ndetuning0 = 2\n"), ConfigError);
  // parses but fails validation
  CHECK_THROWS_AS(parse_config_text("mirror_damping = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("box_side = -3\n"), ConfigError);
}

}  // TEST_SUITE
