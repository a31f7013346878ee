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

#ifndef GFM_SCENARIO_HPP_
#define GFM_SCENARIO_HPP_

#include <stdexcept>
#include <string>

#include "gfm/control.hpp"
#include "gfm/plant.hpp"

// Scenario configuration: everything a simulation run needs, loadable from a
// JSON document. Absent keys keep the nameplate defaults; unknown keys are
// rejected so typos cannot silently fall back to defaults.

namespace gfm {

struct OutputConfig {
  // Record every N controller periods; 0 picks N for 1 ms row spacing.
  int decimation = 0;
  std::string dir;          // directory prepended to the paths below
  std::string csv_path;     // empty disables CSV output
  std::string svg_prefix;   // empty disables SVG plots
  std::string report_path;  // empty disables the metrics report
};

struct ScenarioConfig {
  PlantParams plant;
  ControlParams control;  // droop, loop gains, limiter strategy, flux filter
  FaultDescriptor fault;
  double t_end = 3.0;     // simulated span (s)
  double dt_plant = 1e-6; // plant integration step (s)
  double dt_ctrl = 1e-4;  // controller period (s), integer multiple of dt_plant
  OutputConfig output;
};

// Malformed document or a field with the wrong type / unknown name.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid config whose values break a scenario invariant.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses a JSON scenario document. Missing keys keep defaults, unknown keys
// raise ParseError naming the offending field, syntax errors carry the line
// and column, and invariant violations raise ValidationError.
ScenarioConfig parse_config(const std::string& text);

// Invariants: positive timesteps with dt_ctrl an integer multiple of dt_plant,
// t_end beyond the fault window, and physically positive circuit parameters.
void validate_config(const ScenarioConfig& cfg);

// Plant steps per controller period (validated integer ratio).
int plant_steps_per_control_period(const ScenarioConfig& cfg);

// Effective record decimation: the configured factor, or the closest one to
// 1 ms row spacing when unset.
int effective_decimation(const ScenarioConfig& cfg);

const char* to_string(SaturationStrategy strategy);
const char* to_string(FaultKind kind);

// Inverse of to_string(SaturationStrategy); false when the name is unknown.
bool strategy_from_name(const std::string& name, SaturationStrategy& out);

}  // namespace gfm

#endif  // GFM_SCENARIO_HPP_
