#pragma once

#include <string>
#include <string_view>

#include "optocav/model.hpp"

namespace optocav {

inline constexpr int kDefaultHalfExtent = 9;
inline constexpr double kDefaultBoxSide = 25.132741228718345;  // 8 pi

/// Model parameters plus grid geometry, as read from a config file.
struct Configuration {
  ModelParams model;
  int half_extent = kDefaultHalfExtent;
  double box_side = kDefaultBoxSide;
};

/// Parses the flat `key = value` format ('#' starts a comment, blank lines
/// ignored). Recognized keys: detuning0, mirror_freq, mirror_damping,
/// coupling, thermal_occupation, pump_amplitude, pump_waist, half_extent,
/// box_side. Every key is optional; unknown keys, duplicate keys and
/// malformed values raise ConfigError with the offending line number.
/// Validates the resulting parameters.
Configuration parse_config_text(std::string_view text);

/// Reads and parses a config file; ConfigError if unreadable.
Configuration parse_config_file(const std::string& path);

}  // namespace optocav
