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

#ifndef GFM_SIMULATION_HPP_
#define GFM_SIMULATION_HPP_

#include <optional>
#include <vector>

#include "gfm/scenario.hpp"

// End-to-end scenario execution: the plant integrates at dt_plant, the
// controller runs every dt_ctrl with its modulation held between updates, and
// decimated records plus summary metrics come back for emission.

namespace gfm {

// One decimated output sample; the CSV columns in documented order.
struct SimRecord {
  double t = 0.0;
  ThreePhase v_pcc;
  ThreePhase i_f;
  ThreePhase i_line;
  double p = 0.0;            // converter output active power (W)
  double q = 0.0;            // converter output reactive power (var)
  double omega_c = 0.0;      // droop frequency (rad/s)
  double theta_c = 0.0;      // controller frame angle, unwrapped (rad)
  double i_d_ref = 0.0;      // voltage-loop output, pre-limiter (A)
  double i_q_ref = 0.0;
  double i_d_ref_sat = 0.0;  // current reference after the limiter (A)
  double i_q_ref_sat = 0.0;
  bool enable = true;        // voltage-loop integrator gate
  double phi_conventional = 0.0;  // unwrapped raw reference angle (rad)
  double phi_flux = 0.0;          // unwrapped virtual-flux current angle (rad)
  double psi_cd = 0.0;       // converter flux, d (Wb)
  double psi_cq = 0.0;
  double psi_gd = 0.0;       // grid flux, d (Wb)
  double psi_gq = 0.0;
};

struct RunMetrics {
  double peak_phase_current = 0.0;     // max |i_f| over phases and time (A)
  bool current_limit_violated = false; // peak exceeded 1.2 x i_max_sat
  bool sync_lost = false;              // no recovery within t_end, or diverged
  // Time from fault clearance until the droop settles: |P - P_ref| < 2% of
  // P_ref and |omega_c - omega_ref| < 0.5 rad/s, sustained for 0.5 s. The
  // droop-filtered power is used. Empty when never reached.
  std::optional<double> recovery_time;
  bool diverged = false;               // divergence guard truncated the run
};

// Derived statistics beyond the headline metrics.
struct RunExtras {
  // Largest step-to-step jump of each angle trace inside the fault window
  // (rad per controller period); the comparative smoothness statistic.
  double max_phi_step_conventional = 0.0;
  double max_phi_step_flux = 0.0;
  // Peak |i_f| within the first 10 ms after fault onset, and after it, with
  // the instants at which each peak occurred (plant-step resolution).
  double peak_current_fault_early = 0.0;
  double peak_current_fault_late = 0.0;
  double peak_early_time = 0.0;
  double peak_late_time = 0.0;
};

struct RunResult {
  std::vector<SimRecord> records;
  RunMetrics metrics;
  RunExtras extras;
};

// Runs one scenario to t_end (or to divergence, which truncates the record
// stream but still returns a valid flagged result).
RunResult run_scenario(const ScenarioConfig& cfg);

// One row of a side-by-side strategy comparison over the same scenario.
struct StrategyComparison {
  SaturationStrategy strategy;
  RunMetrics metrics;
  RunExtras extras;
};

// Re-runs the scenario once per strategy, all else identical.
std::vector<StrategyComparison> compare_runs(
    const ScenarioConfig& base, const std::vector<SaturationStrategy>& strategies);

// Process exit code for a finished run: 0 stable, 2 sync lost, 3 diverged.
// (1 is reserved for configuration and I/O failures.)
int exit_code_for(const RunMetrics& metrics);

}  // namespace gfm

#endif  // GFM_SIMULATION_HPP_
