// Copyright 2026 The gfmsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: run scenarios, compare limiter strategies, analyze
// quasi-static stability, and sweep a config parameter over a range.
//
// Exit codes: 0 stable / analysis complete, 1 configuration or I/O error,
// 2 synchronization lost, 3 numerical divergence. compare and sweep return
// the worst code among their runs.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gfm/emit.hpp"
#include "gfm/simulation.hpp"
#include "gfm/stability.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) {
    throw std::runtime_error(path + ": read failed");
  }
  return buf.str();
}

// Precedence: --output-dir flag, then GFMSIM_OUTPUT_DIR, then config.
std::string resolve_output_dir(const std::string& flag_dir,
                               const gfm::ScenarioConfig& cfg) {
  if (!flag_dir.empty()) return flag_dir;
  if (const char* env = std::getenv("GFMSIM_OUTPUT_DIR");
      env != nullptr && env[0] != '\0') {
    return env;
  }
  return cfg.output.dir;
}

std::string joined(const std::string& dir, const std::string& leaf) {
  if (leaf.empty() || dir.empty()) return leaf;
  return (std::filesystem::path(dir) / leaf).string();
}

void emit_outputs(const gfm::ScenarioConfig& cfg, const gfm::RunResult& run,
                  const std::string& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
  if (!cfg.output.csv_path.empty()) {
    gfm::emit_csv(run.records, joined(dir, cfg.output.csv_path));
  }
  if (!cfg.output.svg_prefix.empty()) {
    gfm::emit_svg_plots(run.records, joined(dir, cfg.output.svg_prefix));
  }
  if (!cfg.output.report_path.empty()) {
    gfm::emit_report(cfg, run.metrics, run.extras,
                     joined(dir, cfg.output.report_path));
  }
}

void print_metrics(const gfm::ScenarioConfig& cfg,
                   const gfm::RunMetrics& metrics) {
  std::printf("strategy=%s fault=%s peak_phase_current=%.2fA%s%s%s",
              gfm::to_string(cfg.control.strategy),
              gfm::to_string(cfg.fault.kind), metrics.peak_phase_current,
              metrics.current_limit_violated ? " LIMIT-VIOLATED" : "",
              metrics.sync_lost ? " SYNC-LOST" : "",
              metrics.diverged ? " DIVERGED" : "");
  if (metrics.recovery_time.has_value()) {
    std::printf(" recovery=%.3fs", *metrics.recovery_time);
  }
  std::printf("\n");
}

gfm::QuasiStaticParams quasi_static_from(const gfm::ScenarioConfig& cfg) {
  gfm::QuasiStaticParams p;
  p.v_c = cfg.control.droop.v_ref;
  p.v_g = cfg.plant.v_g_peak;
  p.x_line = cfg.plant.omega_g * cfg.plant.l_g;
  p.p_ref = cfg.control.droop.p_ref;
  p.k_p = cfg.control.droop.k_p;
  p.omega_0 = cfg.control.droop.omega_ref;
  p.omega_g = cfg.plant.omega_g;
  p.i_max_sat = cfg.control.i_max_sat;
  p.omega_pp = cfg.control.droop.omega_pp;
  return p;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::string& strategy_name) {
  gfm::ScenarioConfig cfg = gfm::parse_config(read_file(config_path));
  if (!strategy_name.empty() &&
      !gfm::strategy_from_name(strategy_name, cfg.control.strategy)) {
    std::fprintf(stderr, "unknown strategy '%s'\n", strategy_name.c_str());
    return 1;
  }
  const gfm::RunResult run = gfm::run_scenario(cfg);
  emit_outputs(cfg, run, resolve_output_dir(out_dir, cfg));
  print_metrics(cfg, run.metrics);
  return gfm::exit_code_for(run.metrics);
}

int cmd_compare(const std::string& config_path, const std::string& out_dir,
                const std::vector<std::string>& strategy_names) {
  gfm::ScenarioConfig cfg = gfm::parse_config(read_file(config_path));
  std::vector<gfm::SaturationStrategy> strategies;
  for (const std::string& name : strategy_names) {
    gfm::SaturationStrategy s;
    if (!gfm::strategy_from_name(name, s)) {
      std::fprintf(stderr, "unknown strategy '%s'\n", name.c_str());
      return 1;
    }
    strategies.push_back(s);
  }

  // Per-strategy artifacts get the strategy name as a suffix.
  const std::string dir = resolve_output_dir(out_dir, cfg);
  int worst = 0;
  std::vector<gfm::StrategyComparison> rows;
  for (const gfm::SaturationStrategy s : strategies) {
    gfm::ScenarioConfig one = cfg;
    one.control.strategy = s;
    const std::string suffix = std::string("_") + gfm::to_string(s);
    const auto suffixed = [&](const std::string& path) {
      if (path.empty()) return path;
      const std::filesystem::path p(path);
      return (p.parent_path() / (p.stem().string() + suffix +
                                 p.extension().string()))
          .string();
    };
    one.output.csv_path = suffixed(one.output.csv_path);
    one.output.report_path = suffixed(one.output.report_path);
    if (!one.output.svg_prefix.empty()) one.output.svg_prefix += suffix;
    const gfm::RunResult run = gfm::run_scenario(one);
    emit_outputs(one, run, dir);
    rows.push_back({s, run.metrics, run.extras});
    worst = std::max(worst, gfm::exit_code_for(run.metrics));
  }
  std::fputs(gfm::render_comparison_table(rows).c_str(), stdout);
  return worst;
}

int cmd_stability(const std::string& config_path) {
  const gfm::ScenarioConfig cfg = gfm::parse_config(read_file(config_path));
  const gfm::QuasiStaticParams params = quasi_static_from(cfg);

  std::printf("P_max (normal)     = %.1f W\n", gfm::p_max_normal(params));
  std::printf("P_max (saturated)  = %.1f W\n", gfm::p_max_saturated(params));
  std::printf("fault frequency    = %.3f rad/s\n",
              gfm::fault_frequency(params));
  try {
    const gfm::EquilibriumAngles angles = gfm::equilibrium_angles(params);
    std::printf("delta_0            = %.6f rad\n", angles.delta_0);
    std::printf("delta_max          = %.6f rad\n", angles.delta_max);
    std::printf("delta_max_sat      = %.6f rad\n", angles.delta_max_sat);
    std::printf("saturation boundary= %.6f rad\n",
                gfm::saturation_boundary_angle(params));
    for (const bool with_saturation : {true, false}) {
      const gfm::CriticalClearing cc =
          gfm::critical_clearing_time(params, with_saturation);
      std::printf("T_cc (%s) = ", with_saturation ? "saturated  " : "unsaturated");
      if (std::isinf(cc.t_cc)) {
        std::printf("unbounded\n");
      } else {
        std::printf("%.4f s  (clearing angle %.4f rad, peak %.4f rad)\n",
                    cc.t_cc, cc.clearing_angle, cc.peak_angle);
      }
    }
  } catch (const gfm::NoEquilibrium& e) {
    std::printf("no equilibrium: %s\n", e.what());
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              const std::string& param, const std::string& range) {
  double lo = 0.0, hi = 0.0;
  int n = 0;
  if (std::sscanf(range.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1) {
    std::fprintf(stderr, "bad --range '%s', expected lo:hi:n\n",
                 range.c_str());
    return 1;
  }

  const std::string text = read_file(config_path);
  nlohmann::json doc;
  try {
    doc = text.empty() ? nlohmann::json::object() : nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  std::string pointer = "/" + param;
  for (char& c : pointer) {
    if (c == '.') c = '/';
  }

  std::printf("%14s %6s %10s %10s\n", param.c_str(), "code", "peak_i_f",
              "recovery");
  int worst = 0;
  for (int i = 0; i < n; ++i) {
    const double value =
        n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    nlohmann::json varied = doc;
    varied[nlohmann::json::json_pointer(pointer)] = value;
    gfm::ScenarioConfig cfg = gfm::parse_config(varied.dump());
    const gfm::RunResult run = gfm::run_scenario(cfg);
    const std::string dir = resolve_output_dir(out_dir, cfg);
    if (!cfg.output.csv_path.empty() || !cfg.output.report_path.empty() ||
        !cfg.output.svg_prefix.empty()) {
      gfm::ScenarioConfig numbered = cfg;
      char suffix[32];
      std::snprintf(suffix, sizeof(suffix), "_%03d", i);
      const auto suffixed = [&](const std::string& path) {
        if (path.empty()) return path;
        const std::filesystem::path p(path);
        return (p.parent_path() / (p.stem().string() + suffix +
                                   p.extension().string()))
            .string();
      };
      numbered.output.csv_path = suffixed(cfg.output.csv_path);
      numbered.output.report_path = suffixed(cfg.output.report_path);
      if (!numbered.output.svg_prefix.empty()) {
        numbered.output.svg_prefix += suffix;
      }
      emit_outputs(numbered, run, dir);
    }
    const int code = gfm::exit_code_for(run.metrics);
    worst = std::max(worst, code);
    char recovery[32];
    if (run.metrics.recovery_time.has_value()) {
      std::snprintf(recovery, sizeof(recovery), "%.3fs",
                    *run.metrics.recovery_time);
    } else {
      std::snprintf(recovery, sizeof(recovery), "-");
    }
    std::printf("%14.6g %6d %9.2fA %10s\n", value, code,
                run.metrics.peak_phase_current, recovery);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Droop-controlled grid-forming converter simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string strategy;
  std::vector<std::string> strategies = {"per_component", "amplitude",
                                         "vflux"};
  std::string sweep_param;
  std::string sweep_range;

  CLI::App* run = app.add_subcommand("run", "Simulate one scenario");
  run->add_option("config", config_path, "Scenario JSON file")->required();
  run->add_option("--output-dir", out_dir, "Directory for emitted files");
  run->add_option("--strategy", strategy,
                  "Override the limiter strategy from the config");

  CLI::App* compare = app.add_subcommand(
      "compare", "Run the same scenario under several limiter strategies");
  compare->add_option("config", config_path, "Scenario JSON file")->required();
  compare->add_option("--output-dir", out_dir, "Directory for emitted files");
  compare
      ->add_option("--strategies", strategies,
                   "Comma-separated strategy list")
      ->delimiter(',');

  CLI::App* stability = app.add_subcommand(
      "stability", "Quasi-static power-angle and critical-clearing analysis");
  stability->add_option("config", config_path, "Scenario JSON file")
      ->required();

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Repeat a scenario while varying one config parameter");
  sweep->add_option("config", config_path, "Scenario JSON file")->required();
  sweep->add_option("--param", sweep_param, "Dotted config key, e.g. fault.duration")
      ->required();
  sweep->add_option("--range", sweep_range, "lo:hi:n inclusive linear range")
      ->required();
  sweep->add_option("--output-dir", out_dir, "Directory for emitted files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, strategy);
    if (compare->parsed()) return cmd_compare(config_path, out_dir, strategies);
    if (stability->parsed()) return cmd_stability(config_path);
    if (sweep->parsed()) {
      return cmd_sweep(config_path, out_dir, sweep_param, sweep_range);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
