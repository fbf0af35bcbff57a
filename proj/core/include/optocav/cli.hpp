#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "optocav/config.hpp"
#include "optocav/steady_state.hpp"

namespace optocav {

enum class Command { bistability, steady, spectra, sweep };

/// Fully resolved run description: config-file values with command-line
/// overrides applied. All computation is deterministic; repeated runs of the
/// same config produce byte-identical files.
struct RunConfig {
  Command command = Command::spectra;
  Configuration scenario;

  // bistability
  double p_max = -1.0;  // <0: use 4 * detuning0 + 4
  int steps = 400;

  // steady / spectra working point
  double p_in = -1.0;  // <0: use pump_amplitude^2
  Branch branch = Branch::lower;

  // spectra
  double omega = 0.1;
  std::vector<double> thermal_list;  // empty: use model.thermal_occupation
  bool emit_matrix = false;
  bool dump_system = false;

  // sweep
  std::string sweep_param;
  std::vector<double> sweep_values;
  int jobs = 0;  // 0: hardware concurrency

  unsigned seed = 0;  // reserved; every computation here is deterministic

  std::filesystem::path out_dir = ".";
};

/// Executes one command, writing CSV artifacts under out_dir. Returns the
/// process exit status (0 on success); domain/numerical problems surface as
/// exceptions for the caller to map.
void run(const RunConfig& config);

/// Full front end: parses argv (including --config), runs, maps errors to
/// exit codes: 0 success, 1 numerical/domain error, 2 usage/config error.
int cli_main(int argc, const char* const* argv);

}  // namespace optocav
