// Copyright 2026 The nmqj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "nmqj/config.hpp"
#include "nmqj/csv.hpp"
#include "nmqj/error.hpp"
#include "nmqj/integrator.hpp"
#include "nmqj/model.hpp"
#include "nmqj/statistics.hpp"
#include "nmqj/trajectory.hpp"

namespace nmqj::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kNumericalGuard = 2 };

struct RunOverrides {
  std::optional<std::size_t> traj;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> tmax;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
};

inline void apply(const RunOverrides& o, SimulationConfig& cfg) {
  if (o.traj) cfg.n_traj = *o.traj;
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.dt) cfg.dt = *o.dt;
  if (o.tmax) cfg.t_max = *o.tmax;
  if (o.workers) cfg.workers = *o.workers;
  if (o.out) cfg.output = *o.out;
}

inline void write_table(const CsvTable& table, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    write_csv(out, table);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot open '" + path + "' for writing");
  write_csv(file, table);
  file.flush();
  if (!file) throw Error("failed writing '" + path + "'");
}

inline int cmd_validate(const std::string& path, std::ostream& out) {
  const ParsedConfig parsed = load_config(path, /*check_model=*/false);
  const auto report = validate(parsed.model);
  const auto& model = parsed.model;
  out << "components: " << model.num_components << "\n"
      << "hilbert_dim: " << model.hilbert_dim << "\n"
      << "jump_terms: " << model.jump_terms.size() << "\n";
  if (report.ok()) {
    out << "jump_modes: " << jump_mode_count(model) << "\n"
        << "status: ok\n";
    return kOk;
  }
  out << "status: invalid\n";
  for (const auto& issue : report.issues) out << "  - " << issue << "\n";
  return kFailure;
}

inline int cmd_jump(const std::string& path, const RunOverrides& overrides, std::ostream& out,
                    std::ostream& err) {
  ParsedConfig parsed = load_config(path);
  apply(overrides, parsed.config);
  const auto& cfg = parsed.config;
  const EnsembleResult result =
      run_ensemble(parsed.model, cfg.initial_state(), cfg.observables, cfg.ensemble_settings());
  write_table(to_table(result), cfg.output, out);
  if (!cfg.output.empty()) {
    err << "wrote " << result.times.size() << " samples of " << result.n_traj
        << " trajectories to " << cfg.output << "\n";
  }
  return kOk;
}

inline int cmd_integrate(const std::string& path, const RunOverrides& overrides,
                         std::ostream& out, std::ostream& err) {
  ParsedConfig parsed = load_config(path);
  apply(overrides, parsed.config);
  const auto& cfg = parsed.config;
  const auto samples =
      rk4_integrate(parsed.model, cfg.initial_density(), cfg.dt, cfg.t_max, cfg.sample_stride);
  write_table(to_table(density_series(samples, cfg.observables)), cfg.output, out);
  if (!cfg.output.empty()) {
    err << "wrote " << samples.size() << " samples to " << cfg.output << "\n";
  }
  return kOk;
}

/// Compares every observable column present in both files. The uncertainty
/// of a column comes from `<name>_stderr` in B, else in A, else zero.
inline int cmd_compare(const std::string& path_a, const std::string& path_b, double abs_tol,
                       double z_max, std::ostream& out) {
  const CsvTable a = read_csv_file(path_a);
  const CsvTable b = read_csv_file(path_b);
  if (a.times.size() != b.times.size()) throw GridMismatch("time grids have different lengths");
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    const double scale = std::max(1.0, std::abs(a.times[i]));
    if (std::abs(a.times[i] - b.times[i]) > 1e-12 * scale) {
      throw GridMismatch("time grids differ at row " + std::to_string(i + 1));
    }
  }

  auto is_stderr = [](const std::string& name) {
    constexpr std::string_view suffix = "_stderr";
    return name.size() > suffix.size() &&
           name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };

  std::size_t compared = 0;
  bool all_pass = true;
  for (std::size_t k = 0; k < a.columns.size(); ++k) {
    const std::string& name = a.columns[k];
    if (is_stderr(name)) continue;
    const auto kb = b.find(name);
    if (!kb) continue;
    std::vector<double> sigma(a.times.size(), 0.0);
    if (const auto sb = b.find(name + "_stderr")) {
      sigma = b.values[*sb];
    } else if (const auto sa = a.find(name + "_stderr")) {
      sigma = a.values[*sa];
    }
    const auto report = compare_series(a.values[k], b.values[*kb], sigma, abs_tol, z_max);
    ++compared;
    all_pass = all_pass && report.pass;
    out << name << ": max_abs_diff=" << format_number(report.max_abs_diff)
        << " max_z=" << format_number(report.max_z) << " failing_points=" << report.failing_points
        << " " << (report.pass ? "PASS" : "FAIL") << "\n";
  }
  if (compared == 0) {
    out << "no common observable columns\n";
    return kFailure;
  }
  out << (all_pass ? "PASS" : "FAIL") << "\n";
  return all_pass ? kOk : kFailure;
}

inline int cmd_export_model(const std::string& path, std::ostream& out) {
  const ParsedConfig parsed = load_config(path);
  out << serialize_model(parsed.model, parsed.metadata);
  return kOk;
}

/// Walks a nested exception chain for a numerical guard.
inline const NumericalGuard* find_guard(const std::exception& e) {
  if (const auto* g = dynamic_cast<const NumericalGuard*>(&e)) return g;
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    return find_guard(inner);
  } catch (...) {
  }
  return nullptr;
}

inline bool guard_is_step_too_large(const std::exception& e, double& dt) {
  if (const auto* s = dynamic_cast<const StepTooLarge*>(&e)) {
    dt = s->dt();
    return true;
  }
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    return guard_is_step_too_large(inner, dt);
  } catch (...) {
  }
  return false;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Monte Carlo wave-function simulation of coupled-component Lindblad equations",
               "nmqj"};
  app.require_subcommand(1);

  std::string config_path;
  RunOverrides overrides;
  std::string csv_a;
  std::string csv_b;
  double abs_tol = 0.05;
  double z_max = 3.0;

  auto* validate_cmd = app.add_subcommand("validate", "Check a config and print the model report");
  validate_cmd->add_option("config", config_path, "Config file")->required();

  auto add_run_flags = [&](CLI::App* cmd, bool ensemble) {
    cmd->add_option("config", config_path, "Config file")->required();
    cmd->add_option("--dt", overrides.dt, "Time step");
    cmd->add_option("--tmax", overrides.tmax, "Final time");
    cmd->add_option("--out", overrides.out, "Output CSV path ('-' for stdout)");
    if (ensemble) {
      cmd->add_option("--traj", overrides.traj, "Number of trajectories");
      cmd->add_option("--seed", overrides.seed, "Master seed");
      cmd->add_option("--workers", overrides.workers, "Worker threads (0 = all cores)");
    }
  };
  auto* jump_cmd = app.add_subcommand("jump", "Run the trajectory ensemble and write a CSV");
  add_run_flags(jump_cmd, true);
  auto* integrate_cmd =
      app.add_subcommand("integrate", "Integrate the master equation with RK4 and write a CSV");
  add_run_flags(integrate_cmd, false);

  auto* compare_cmd = app.add_subcommand("compare", "Compare two CSV files");
  compare_cmd->add_option("a", csv_a, "First CSV")->required();
  compare_cmd->add_option("b", csv_b, "Second CSV")->required();
  compare_cmd->add_option("--abs-tol", abs_tol, "Absolute tolerance per point");
  compare_cmd->add_option("--z-max", z_max, "Largest accepted z-score per point");

  auto* export_cmd =
      app.add_subcommand("export-model", "Print the config's model in explicit file form");
  export_cmd->add_option("config", config_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kFailure;
  }

  try {
    if (*validate_cmd) return cmd_validate(config_path, out);
    if (*jump_cmd) return cmd_jump(config_path, overrides, out, err);
    if (*integrate_cmd) return cmd_integrate(config_path, overrides, out, err);
    if (*compare_cmd) return cmd_compare(csv_a, csv_b, abs_tol, z_max, out);
    if (*export_cmd) return cmd_export_model(config_path, out);
  } catch (const std::exception& e) {
    err << "error: " << describe_exception(e) << "\n";
    if (find_guard(e) != nullptr) {
      double dt = 0.0;
      if (guard_is_step_too_large(e, dt)) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof(buf), dt / 10.0,
                                       std::chars_format::general, 6);
        err << "hint: retry with a smaller time step, e.g. --dt " << std::string_view(buf, res.ptr)
            << "\n";
      }
      return kNumericalGuard;
    }
    return kFailure;
  }
  return kFailure;
}

}  // namespace nmqj::cli
