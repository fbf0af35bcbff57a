#include "optocav/model.hpp"

#include <cmath>
#include <numbers>

namespace optocav {

void PhysicalParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw DomainError(std::string("PhysicalParams: ") + name + " must be > 0");
  };
  positive(mirror_mass, "mirror_mass");
  positive(mirror_freq, "mirror_freq");
  positive(cavity_length, "cavity_length");
  positive(optical_freq, "optical_freq");
}

double coupling_from_physical(const PhysicalParams& p, double hbar) {
  p.validate();
  if (!(hbar > 0.0)) throw DomainError("coupling_from_physical: hbar must be > 0");
  return p.optical_freq / p.cavity_length * std::sqrt(hbar / (p.mirror_mass * p.mirror_freq));
}

std::vector<std::string> physical_warnings(const PhysicalParams& p) {
  std::vector<std::string> out;
  if (p.optical_freq > 0.0 && p.mirror_freq > 0.0 && p.optical_freq / p.mirror_freq < 1e3) {
    out.push_back("optical_freq / mirror_freq < 1e3: the adiabatic single-resonance "
                  "treatment assumes a much faster optical scale");
  }
  return out;
}

void ModelParams::validate() const {
  if (!(mirror_freq > 0.0)) throw DomainError("ModelParams: mirror_freq must be > 0");
  if (!(mirror_damping > 0.0)) throw DomainError("ModelParams: mirror_damping must be > 0");
  if (!(pump_waist > 0.0)) throw DomainError("ModelParams: pump_waist must be > 0");
  if (!(coupling > 0.0)) throw DomainError("ModelParams: coupling must be > 0");
  if (!(thermal_occupation >= 0.0))
    throw DomainError("ModelParams: thermal_occupation must be >= 0");
  if (!std::isfinite(detuning0)) throw DomainError("ModelParams: detuning0 must be finite");
  if (!std::isfinite(pump_amplitude))
    throw DomainError("ModelParams: pump_amplitude must be finite");
  const double q = quality_factor();
  if (!(std::isfinite(q) && q > 1.0))
    throw DomainError("ModelParams: quality factor mirror_freq / mirror_damping must be "
                      "finite and > 1");
}

int ModeGrid::ordinal(int nx, int ny) const {
  if (!contains(nx, ny))
    throw DomainError("ModeGrid: index (" + std::to_string(nx) + ", " + std::to_string(ny) +
                      ") outside half_extent " + std::to_string(half_extent));
  return (ny + half_extent) * side() + (nx + half_extent);
}

ModeIndex ModeGrid::mode_of_flat(int flat) const {
  if (flat < 0 || flat % 2 != 0 || flat / 2 >= count())
    throw DomainError("ModeGrid: invalid flat index " + std::to_string(flat));
  return indices[static_cast<std::size_t>(flat / 2)];
}

std::array<double, 2> ModeGrid::wavevector(int ordinal) const {
  const ModeIndex& m = indices.at(static_cast<std::size_t>(ordinal));
  const double dk = 2.0 * std::numbers::pi / box_side;
  return {dk * m.nx, dk * m.ny};
}

ModeGrid build_grid(const ModelParams& params, int half_extent, double box_side) {
  params.validate();
  if (half_extent < 0) throw DomainError("build_grid: half_extent must be >= 0");
  if (!(box_side > 0.0)) throw DomainError("build_grid: box_side must be > 0");

  ModeGrid grid;
  grid.half_extent = half_extent;
  grid.box_side = box_side;
  grid.detuning0 = params.detuning0;
  const int side = grid.side();
  grid.indices.reserve(static_cast<std::size_t>(side) * side);
  grid.k_squared.reserve(grid.indices.capacity());
  grid.detunings.reserve(grid.indices.capacity());

  const double dk = 2.0 * std::numbers::pi / box_side;
  for (int ny = -half_extent; ny <= half_extent; ++ny) {
    for (int nx = -half_extent; nx <= half_extent; ++nx) {
      const int ord = static_cast<int>(grid.indices.size());
      grid.indices.push_back({nx, ny, 2 * ord});
      const double k2 = dk * dk * (static_cast<double>(nx) * nx + static_cast<double>(ny) * ny);
      grid.k_squared.push_back(k2);
      grid.detunings.push_back(params.detuning0 + k2);
    }
  }

  if (box_side < 4.0 * params.pump_waist) {
    grid.warnings.push_back("box_side < 4 * pump_waist: periodic pump images overlap, "
                            "mode components alias");
  }
  return grid;
}

std::vector<Complex> pump_components(const ModelParams& params, const ModeGrid& grid) {
  const double prefactor = params.pump_amplitude * std::sqrt(2.0 * std::numbers::pi) *
                           params.pump_waist / grid.box_side;
  const double gauss = params.pump_waist * params.pump_waist / 4.0;
  std::vector<Complex> e(grid.k_squared.size());
  for (std::size_t n = 0; n < e.size(); ++n) {
    e[n] = prefactor * std::exp(-gauss * grid.k_squared[n]);
  }
  return e;
}

}  // namespace optocav
