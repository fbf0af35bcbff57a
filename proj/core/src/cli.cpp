#include "optocav/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "optocav/errors.hpp"
#include "optocav/fluctuations.hpp"
#include "optocav/spectra.hpp"

namespace optocav {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

std::string scenario_header(const Configuration& c) {
  std::ostringstream h;
  h << "detuning0=" << num(c.model.detuning0) << " mirror_freq=" << num(c.model.mirror_freq)
    << " mirror_damping=" << num(c.model.mirror_damping) << " coupling=" << num(c.model.coupling)
    << " thermal_occupation=" << num(c.model.thermal_occupation)
    << " pump_amplitude=" << num(c.model.pump_amplitude)
    << " pump_waist=" << num(c.model.pump_waist) << " half_extent=" << c.half_extent
    << " box_side=" << num(c.box_side);
  return h.str();
}

void print_warnings(const ModeGrid& grid) {
  for (const std::string& w : grid.warnings) std::cerr << "warning: " << w << "\n";
}

void note(const fs::path& p) { std::cout << "wrote " << p.string() << "\n"; }

double pick_root(const std::vector<PowerRoot>& roots, Branch want, double p_in) {
  const PowerRoot* chosen = nullptr;
  for (const PowerRoot& r : roots) {
    if (want == Branch::unstable ? !r.stable : r.stable) {
      if (want != Branch::upper) { chosen = &r; break; }
      chosen = &r;  // keep the last stable one
    }
  }
  if (!chosen) {
    std::ostringstream msg;
    msg << "no " << branch_name(want) << " root at input power " << num(p_in) << " (roots:";
    for (const PowerRoot& r : roots)
      msg << " " << num(r.intracavity_power) << (r.stable ? "[stable]" : "[unstable]");
    msg << ")";
    throw DomainError(msg.str());
  }
  return chosen->intracavity_power;
}

void run_bistability(const RunConfig& cfg) {
  const Configuration& scn = cfg.scenario;
  const ModeGrid grid = build_grid(scn.model, scn.half_extent, scn.box_side);
  print_warnings(grid);
  const double p_max = cfg.p_max > 0.0 ? cfg.p_max : 4.0 * scn.model.detuning0 + 4.0;
  const BistabilityCurve curve = trace_bistability(scn.model, grid, p_max, cfg.steps);

  std::ostringstream out;
  out << "# optocav bistability " << scenario_header(scn) << " p_max=" << num(p_max)
      << " steps=" << cfg.steps << "\n";
  out << "P,P_in,stable\n";
  for (const BistabilitySample& s : curve.samples)
    out << num(s.intracavity_power) << "," << num(s.input_power) << "," << (s.stable ? 1 : 0)
        << "\n";
  const fs::path path = cfg.out_dir / "bistability.csv";
  write_text(path, out.str());
  note(path);
}

SteadyState working_point(const RunConfig& cfg, const ModeGrid& grid, double* p_in_out) {
  const Configuration& scn = cfg.scenario;
  const double p_in =
      cfg.p_in >= 0.0 ? cfg.p_in : scn.model.pump_amplitude * scn.model.pump_amplitude;
  const auto roots = solve_intracavity_power(p_in, scn.model, grid);
  const double p = pick_root(roots, cfg.branch, p_in);
  if (p_in_out) *p_in_out = p_in;
  return steady_state_at(p, scn.model, grid);
}

void run_steady(const RunConfig& cfg) {
  const Configuration& scn = cfg.scenario;
  const ModeGrid grid = build_grid(scn.model, scn.half_extent, scn.box_side);
  print_warnings(grid);
  double p_in = 0.0;
  const SteadyState st = working_point(cfg, grid, &p_in);

  std::ostringstream head;
  head << "# optocav steady " << scenario_header(scn) << " p_in=" << num(p_in)
       << " branch=" << branch_name(st.branch) << " P=" << num(st.intracavity_power)
       << " mirror_displacement=" << num(st.mirror_displacement);

  std::ostringstream amps;
  amps << head.str() << "\n";
  amps << "n_x,n_y,re_alpha,im_alpha,re_alpha_out,im_alpha_out\n";
  for (int n = 0; n < grid.count(); ++n) {
    const auto& mode = grid.indices[static_cast<std::size_t>(n)];
    const Complex a = st.amplitudes[static_cast<std::size_t>(n)];
    const Complex o = st.output_amplitudes[static_cast<std::size_t>(n)];
    amps << mode.nx << "," << mode.ny << "," << num(a.real()) << "," << num(a.imag()) << ","
         << num(o.real()) << "," << num(o.imag()) << "\n";
  }
  const fs::path amp_path = cfg.out_dir / "steady_amplitudes.csv";
  write_text(amp_path, amps.str());
  note(amp_path);

  const auto profile = radial_profile(st, grid, 161, 4.0 * scn.model.pump_waist);
  std::ostringstream prof;
  prof << head.str() << "\n";
  prof << "r,re_in,im_in,re_out,im_out\n";
  for (const RadialSample& s : profile)
    prof << num(s.r) << "," << num(s.input.real()) << "," << num(s.input.imag()) << ","
         << num(s.output.real()) << "," << num(s.output.imag()) << "\n";
  const fs::path prof_path = cfg.out_dir / "steady_profile.csv";
  write_text(prof_path, prof.str());
  note(prof_path);
}

void dump_system_files(const SteadyState& st, const Configuration& scn, const ModeGrid& grid,
                       double omega, const fs::path& dir, bool quiet) {
  const FluctuationSystem sys = assemble_system(st, scn.model, grid, omega, AssemblyMode::dense);
  const DenseSolution sol = solve_dense(sys);
  Eigen::MatrixXcd m = *sys.matrix;
  m.diagonal().array() -= Complex(1.0, omega);

  auto dump = [&](const Eigen::MatrixXcd& mat, const char* name) {
    std::ostringstream out;
    out << "# optocav system " << scenario_header(scn) << " omega=" << num(omega) << "\n";
    out << "row,col,re,im\n";
    for (int r = 0; r < mat.rows(); ++r)
      for (int c = 0; c < mat.cols(); ++c)
        out << r << "," << c << "," << num(mat(r, c).real()) << "," << num(mat(r, c).imag())
            << "\n";
    const fs::path path = dir / name;
    write_text(path, out.str());
    if (!quiet) note(path);
  };
  dump(m, "system_m.csv");
  dump(sol.B, "system_b.csv");
}

/// The shared spectra pipeline: used verbatim by the `spectra` command and by
/// every sweep point, so a one-point sweep reproduces a plain run exactly.
void run_spectra_files(const Configuration& scn, double omega, std::vector<double> nts,
                       double p_in_arg, Branch branch, bool emit_matrix, bool dump_system,
                       const fs::path& dir, bool quiet) {
  const ModeGrid grid = build_grid(scn.model, scn.half_extent, scn.box_side);
  if (!quiet) print_warnings(grid);
  const double p_in =
      p_in_arg >= 0.0 ? p_in_arg : scn.model.pump_amplitude * scn.model.pump_amplitude;
  const auto roots = solve_intracavity_power(p_in, scn.model, grid);
  const double p = pick_root(roots, branch, p_in);
  const SteadyState st = steady_state_at(p, scn.model, grid);

  if (nts.empty()) nts.push_back(scn.model.thermal_occupation);

  const FluctuationSystem sys_plus =
      assemble_system(st, scn.model, grid, omega, AssemblyMode::matrix_free);
  const FluctuationSystem sys_minus =
      assemble_system(st, scn.model, grid, -omega, AssemblyMode::matrix_free);
  const FastSolution sol_plus = solve_fast(sys_plus);
  const FastSolution sol_minus = solve_fast(sys_minus);
  const FastMomentKernel kernel(sol_plus, sol_minus);

  if (dump_system) dump_system_files(st, scn, grid, omega, dir, quiet);

  std::ostringstream summary;
  summary << "# optocav spectra " << scenario_header(scn) << " p_in=" << num(p_in)
          << " branch=" << branch_name(st.branch) << " P=" << num(p) << " omega=" << num(omega)
          << "\n";
  summary << "index,omega,nt,s_total\n";

  for (std::size_t i = 0; i < nts.size(); ++i) {
    ModelParams params_nt = scn.model;
    params_nt.thermal_occupation = nts[i];
    const SpectrumSlices slices = spectra_slices(kernel, params_nt, st, grid);
    const long masked_count =
        std::count(slices.masked.begin(), slices.masked.end(), true);

    std::ostringstream head;
    head << "# optocav spectra " << scenario_header(scn) << " p_in=" << num(p_in)
         << " branch=" << branch_name(st.branch) << " P=" << num(p) << " omega=" << num(omega)
         << " nt=" << num(nts[i]) << " masked=" << masked_count;

    std::ostringstream auto_csv;
    auto_csv << head.str() << "\n" << "n_x,n_y,S_nn\n";
    std::ostringstream cross_csv;
    cross_csv << head.str() << "\n" << "n_x,n_y,S_0n\n";
    for (int n = 0; n < grid.count(); ++n) {
      if (slices.masked[static_cast<std::size_t>(n)]) continue;
      const auto& mode = grid.indices[static_cast<std::size_t>(n)];
      auto_csv << mode.nx << "," << mode.ny << ","
               << num(slices.s_auto[static_cast<std::size_t>(n)]) << "\n";
      cross_csv << mode.nx << "," << mode.ny << ","
                << num(slices.s_cross0[static_cast<std::size_t>(n)]) << "\n";
    }
    const fs::path auto_path = dir / ("spectra_auto_" + std::to_string(i) + ".csv");
    const fs::path cross_path = dir / ("spectra_cross0_" + std::to_string(i) + ".csv");
    write_text(auto_path, auto_csv.str());
    write_text(cross_path, cross_csv.str());
    if (!quiet) { note(auto_path); note(cross_path); }

    if (emit_matrix) {
      const MomentSet moments = output_moments(kernel, params_nt);
      const SpectrumResult full = intensity_spectrum_matrix(moments, st);
      std::ostringstream mat_csv;
      mat_csv << head.str() << "\n" << "n_x,n_y,m_x,m_y,S\n";
      for (int n = 0; n < grid.count(); ++n) {
        if (full.masked[static_cast<std::size_t>(n)]) continue;
        for (int m = 0; m < grid.count(); ++m) {
          if (full.masked[static_cast<std::size_t>(m)]) continue;
          const auto& a = grid.indices[static_cast<std::size_t>(n)];
          const auto& b = grid.indices[static_cast<std::size_t>(m)];
          mat_csv << a.nx << "," << a.ny << "," << b.nx << "," << b.ny << "," << num(full.s(n, m))
                  << "\n";
        }
      }
      const fs::path mat_path = dir / ("spectra_matrix_" + std::to_string(i) + ".csv");
      write_text(mat_path, mat_csv.str());
      if (!quiet) note(mat_path);
    }

    summary << i << "," << num(omega) << "," << num(nts[i]) << "," << num(slices.s_total) << "\n";
  }
  const fs::path sum_path = dir / "spectra_summary.csv";
  write_text(sum_path, summary.str());
  if (!quiet) note(sum_path);
}

void apply_sweep_override(Configuration& scn, double& omega, double& p_in,
                          const std::string& param, double value) {
  if (param == "detuning0") scn.model.detuning0 = value;
  else if (param == "mirror_freq") scn.model.mirror_freq = value;
  else if (param == "mirror_damping") scn.model.mirror_damping = value;
  else if (param == "coupling") scn.model.coupling = value;
  else if (param == "thermal_occupation") scn.model.thermal_occupation = value;
  else if (param == "pump_amplitude") scn.model.pump_amplitude = value;
  else if (param == "pump_waist") scn.model.pump_waist = value;
  else if (param == "box_side") scn.box_side = value;
  else if (param == "omega") omega = value;
  else if (param == "pin") p_in = value;
  else throw ConfigError("unknown sweep parameter '" + param + "'");
  scn.model.validate();
}

void run_sweep(const RunConfig& cfg) {
  if (cfg.sweep_param.empty() || cfg.sweep_values.empty())
    throw ConfigError("sweep requires --param and --values");
  {  // reject bad parameter names before spawning workers
    Configuration probe = cfg.scenario;
    double om = cfg.omega, pi = cfg.p_in;
    apply_sweep_override(probe, om, pi, cfg.sweep_param, cfg.sweep_values.front());
  }

  const int jobs = cfg.jobs > 0
                       ? cfg.jobs
                       : std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cfg.sweep_values.size()) return;
      {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error) return;
      }
      try {
        char tag[16];
        std::snprintf(tag, sizeof tag, "point_%03zu", i);
        const fs::path final_dir = cfg.out_dir / tag;
        if (fs::exists(final_dir)) continue;  // resumable: done earlier
        const fs::path tmp_dir = cfg.out_dir / (std::string(tag) + ".partial");
        fs::remove_all(tmp_dir);
        fs::create_directories(tmp_dir);

        Configuration scn = cfg.scenario;
        double omega = cfg.omega, p_in = cfg.p_in;
        apply_sweep_override(scn, omega, p_in, cfg.sweep_param, cfg.sweep_values[i]);
        run_spectra_files(scn, omega, cfg.thermal_list, p_in, cfg.branch, cfg.emit_matrix,
                          false, tmp_dir, /*quiet=*/true);
        fs::rename(tmp_dir, final_dir);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  std::ostringstream index;
  index << "# optocav sweep " << scenario_header(cfg.scenario) << " param=" << cfg.sweep_param
        << " omega=" << num(cfg.omega) << "\n";
  index << "index,param,value,dir\n";
  for (std::size_t i = 0; i < cfg.sweep_values.size(); ++i) {
    char tag[16];
    std::snprintf(tag, sizeof tag, "point_%03zu", i);
    index << i << "," << cfg.sweep_param << "," << num(cfg.sweep_values[i]) << "," << tag << "\n";
  }
  const fs::path index_path = cfg.out_dir / "sweep_index.csv";
  write_text(index_path, index.str());
  note(index_path);
  std::cout << "swept " << cfg.sweep_values.size() << " points\n";
}

}  // namespace

void run(const RunConfig& cfg) {
  cfg.scenario.model.validate();
  fs::create_directories(cfg.out_dir);
  switch (cfg.command) {
    case Command::bistability: run_bistability(cfg); break;
    case Command::steady: run_steady(cfg); break;
    case Command::spectra:
      run_spectra_files(cfg.scenario, cfg.omega, cfg.thermal_list, cfg.p_in, cfg.branch,
                        cfg.emit_matrix, cfg.dump_system, cfg.out_dir, /*quiet=*/false);
      break;
    case Command::sweep: run_sweep(cfg); break;
  }
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Multimode moving-mirror cavity: classical steady states, bistability, "
               "and output intensity-correlation spectra"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  std::string branch_str = "lower";
  std::string out_str = ".";

  const std::map<std::string, Branch> branch_map{
      {"lower", Branch::lower}, {"upper", Branch::upper}, {"unstable", Branch::unstable}};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file (key = value lines)");
    sub->add_option("--out", out_str, "output directory")->capture_default_str();
    sub->add_option("--half-extent", cfg.scenario.half_extent,
                    "mode index range [-n, n] per axis");
    sub->add_option("--box-side", cfg.scenario.box_side, "transverse box side");
  };
  auto add_point = [&](CLI::App* sub) {
    sub->add_option("--pin", cfg.p_in, "input power (default: pump_amplitude^2)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--branch", branch_str, "lower|upper|unstable")
        ->check(CLI::IsMember({"lower", "upper", "unstable"}));
  };
  auto add_spectra = [&](CLI::App* sub) {
    sub->add_option("--omega", cfg.omega, "analysis frequency")->capture_default_str();
    sub->add_option("--nt", cfg.thermal_list, "thermal occupations (list)")->delimiter(',');
    sub->add_flag("--matrix", cfg.emit_matrix, "also emit the full correlation matrix");
  };

  CLI::App* bist = app.add_subcommand("bistability", "trace the input/intracavity power curve");
  add_common(bist);
  bist->add_option("--pmax", cfg.p_max, "largest intracavity power (default: 4 detuning0 + 4)");
  bist->add_option("--steps", cfg.steps, "curve samples")->capture_default_str();

  CLI::App* steady = app.add_subcommand("steady", "solve one steady state and its profile");
  add_common(steady);
  add_point(steady);

  CLI::App* spectra = app.add_subcommand("spectra", "output intensity-correlation spectra");
  add_common(spectra);
  add_point(spectra);
  add_spectra(spectra);
  spectra->add_flag("--dump-system", cfg.dump_system, "dump the system and transfer matrices");

  CLI::App* sweep = app.add_subcommand("sweep", "spectra over a parameter grid");
  add_common(sweep);
  add_point(sweep);
  add_spectra(sweep);
  sweep->add_option("--param", cfg.sweep_param, "parameter to sweep (config key, omega or pin)");
  sweep->add_option("--values", cfg.sweep_values, "sweep values")->delimiter(',');
  sweep->add_option("--jobs", cfg.jobs, "parallel workers (default: hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) {
      const Configuration file_cfg = parse_config_file(config_path);
      // command-line overrides win over the file
      Configuration merged = file_cfg;
      for (CLI::App* sub : {bist, steady, spectra, sweep}) {
        if (!sub->parsed()) continue;
        if (sub->count("--half-extent") == 0) cfg.scenario.half_extent = merged.half_extent;
        if (sub->count("--box-side") == 0) cfg.scenario.box_side = merged.box_side;
      }
      cfg.scenario.model = merged.model;
    }
    cfg.branch = branch_map.at(branch_str);
    cfg.out_dir = out_str;
    if (bist->parsed()) cfg.command = Command::bistability;
    if (steady->parsed()) cfg.command = Command::steady;
    if (spectra->parsed()) cfg.command = Command::spectra;
    if (sweep->parsed()) cfg.command = Command::sweep;
    run(cfg);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  } catch (const ConsistencyError& e) {
    std::cerr << "internal consistency error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace optocav
