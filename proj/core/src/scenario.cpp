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

#include "gfm/scenario.hpp"

#include <cmath>
#include <set>
#include <string>
#include <utility>

#include <json.hpp>

namespace gfm {

namespace {

using nlohmann::json;

// Tracks which keys of one JSON object have been consumed so that anything
// left over can be reported as unknown, with its full dotted path.
class Section {
 public:
  Section(const json* obj, std::string path)
      : obj_(obj), path_(std::move(path)) {}

  const json* find(const char* key) {
    if (obj_ == nullptr) return nullptr;
    consumed_.insert(key);
    const auto it = obj_->find(key);
    return it == obj_->end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_number()) {
      throw ParseError("field '" + member(key) + "': expected a number");
    }
    out = v->get<double>();
  }

  void integer(const char* key, int& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_number_integer()) {
      throw ParseError("field '" + member(key) + "': expected an integer");
    }
    out = v->get<int>();
  }

  void text(const char* key, std::string& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_string()) {
      throw ParseError("field '" + member(key) + "': expected a string");
    }
    out = v->get<std::string>();
  }

  Section object(const char* key) {
    const json* v = find(key);
    if (v == nullptr) return Section(nullptr, member(key));
    if (!v->is_object()) {
      throw ParseError("field '" + member(key) + "': expected an object");
    }
    return Section(v, member(key));
  }

  void finish() const {
    if (obj_ == nullptr) return;
    for (const auto& item : obj_->items()) {
      if (consumed_.find(item.key()) == consumed_.end()) {
        throw ParseError("unknown key '" + member(item.key()) + "'");
      }
    }
  }

  std::string member(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json* obj_;
  std::string path_;
  std::set<std::string> consumed_;
};

SaturationStrategy strategy_from_string(const std::string& name,
                                        const std::string& field) {
  if (name == "per_component") return SaturationStrategy::PerComponent;
  if (name == "amplitude") return SaturationStrategy::Amplitude;
  if (name == "vflux") return SaturationStrategy::VirtualFlux;
  throw ParseError("field '" + field + "': expected one of per_component, " +
                   "amplitude, vflux; got '" + name + "'");
}

FaultKind fault_kind_from_string(const std::string& name,
                                 const std::string& field) {
  if (name == "none") return FaultKind::None;
  if (name == "three_phase_sag") return FaultKind::ThreePhaseSag;
  if (name == "two_phase_short") return FaultKind::TwoPhaseShortToGround;
  if (name == "phase_shift") return FaultKind::ThreePhaseShift;
  throw ParseError("field '" + field + "': expected one of none, " +
                   "three_phase_sag, two_phase_short, phase_shift; got '" +
                   name + "'");
}

}  // namespace

const char* to_string(SaturationStrategy strategy) {
  switch (strategy) {
    case SaturationStrategy::PerComponent:
      return "per_component";
    case SaturationStrategy::Amplitude:
      return "amplitude";
    case SaturationStrategy::VirtualFlux:
      return "vflux";
  }
  return "?";
}

const char* to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::None:
      return "none";
    case FaultKind::ThreePhaseSag:
      return "three_phase_sag";
    case FaultKind::TwoPhaseShortToGround:
      return "two_phase_short";
    case FaultKind::ThreePhaseShift:
      return "phase_shift";
  }
  return "?";
}

bool strategy_from_name(const std::string& name, SaturationStrategy& out) {
  if (name == "per_component") {
    out = SaturationStrategy::PerComponent;
  } else if (name == "amplitude") {
    out = SaturationStrategy::Amplitude;
  } else if (name == "vflux") {
    out = SaturationStrategy::VirtualFlux;
  } else {
    return false;
  }
  return true;
}

ScenarioConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = text.empty() ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());  // nlohmann reports line and column
  }
  if (!doc.is_object()) {
    throw ParseError("top level: expected a JSON object");
  }

  ScenarioConfig cfg;
  Section root(&doc, "");

  {
    Section plant = root.object("plant");
    plant.number("l_f", cfg.plant.l_f);
    plant.number("r_f", cfg.plant.r_f);
    plant.number("c_f", cfg.plant.c_f);
    plant.number("l_g", cfg.plant.l_g);
    plant.number("r_g", cfg.plant.r_g);
    plant.number("r_l", cfg.plant.r_load);
    plant.number("v_dc", cfg.plant.v_dc);
    plant.number("v_g_peak", cfg.plant.v_g_peak);
    plant.number("omega_g", cfg.plant.omega_g);
    plant.finish();
  }
  {
    Section droop = root.object("droop");
    droop.number("k_p", cfg.control.droop.k_p);
    droop.number("k_q", cfg.control.droop.k_q);
    droop.number("omega_ref", cfg.control.droop.omega_ref);
    droop.number("v_ref", cfg.control.droop.v_ref);
    droop.number("p_ref", cfg.control.droop.p_ref);
    droop.number("q_ref", cfg.control.droop.q_ref);
    droop.number("omega_pp", cfg.control.droop.omega_pp);
    droop.finish();
  }
  {
    Section gains = root.object("gains");
    gains.number("k_pv", cfg.control.k_pv);
    gains.number("k_iv", cfg.control.k_iv);
    gains.number("k_pi", cfg.control.k_pi);
    gains.number("k_ii", cfg.control.k_ii);
    gains.finish();
  }

  std::string strategy;
  root.text("saturation_strategy", strategy);
  if (!strategy.empty()) {
    cfg.control.strategy =
        strategy_from_string(strategy, "saturation_strategy");
  }
  root.number("i_max_sat", cfg.control.i_max_sat);
  // The per-component clamps split the amplitude limit evenly between axes.
  cfg.control.i_d_max = cfg.control.i_max_sat / std::sqrt(2.0);
  cfg.control.i_q_max = cfg.control.i_d_max;
  root.number("omega_f", cfg.control.omega_f);

  {
    Section fault = root.object("fault");
    std::string kind;
    fault.text("kind", kind);
    if (!kind.empty()) {
      cfg.fault.kind = fault_kind_from_string(kind, "fault.kind");
    }
    fault.number("start", cfg.fault.start);
    fault.number("duration", cfg.fault.duration);
    fault.number("sag_fraction", cfg.fault.sag_fraction);
    fault.number("fault_resistance", cfg.fault.fault_resistance);
    fault.number("shift_angle", cfg.fault.shift_angle);
    fault.finish();
  }

  root.number("t_end", cfg.t_end);
  root.number("dt_plant", cfg.dt_plant);
  root.number("dt_ctrl", cfg.dt_ctrl);

  {
    Section output = root.object("output");
    output.integer("decimation", cfg.output.decimation);
    output.text("dir", cfg.output.dir);
    output.text("csv", cfg.output.csv_path);
    output.text("svg_prefix", cfg.output.svg_prefix);
    output.text("report", cfg.output.report_path);
    output.finish();
  }

  root.finish();
  validate_config(cfg);
  return cfg;
}

void validate_config(const ScenarioConfig& cfg) {
  const auto fail = [](const std::string& message) {
    throw ValidationError(message);
  };

  if (!(cfg.dt_plant > 0.0)) fail("dt_plant must be positive");
  if (!(cfg.dt_ctrl > 0.0)) fail("dt_ctrl must be positive");
  if (!(cfg.t_end > 0.0)) fail("t_end must be positive");

  const double ratio = cfg.dt_ctrl / cfg.dt_plant;
  const long long k = std::llround(ratio);
  if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-6 * ratio) {
    fail("dt_ctrl must be an integer multiple of dt_plant (ratio " +
         std::to_string(ratio) + ")");
  }

  if (cfg.fault.kind != FaultKind::None) {
    if (cfg.fault.start < 0.0) fail("fault.start must be non-negative");
    if (cfg.fault.duration < 0.0) fail("fault.duration must be non-negative");
    if (!(cfg.t_end > cfg.fault.start + cfg.fault.duration)) {
      fail("t_end must exceed fault.start + fault.duration");
    }
    if (cfg.fault.sag_fraction < 0.0 || cfg.fault.sag_fraction > 1.0) {
      fail("fault.sag_fraction must lie in [0, 1]");
    }
    if (!(cfg.fault.fault_resistance > 0.0)) {
      fail("fault.fault_resistance must be positive");
    }
  }

  if (!(cfg.plant.l_f > 0.0)) fail("plant.l_f must be positive");
  if (!(cfg.plant.c_f > 0.0)) fail("plant.c_f must be positive");
  if (!(cfg.plant.l_g > 0.0)) fail("plant.l_g must be positive");
  if (!(cfg.plant.r_load > 0.0)) fail("plant.r_l must be positive");
  if (!(cfg.plant.v_dc > 0.0)) fail("plant.v_dc must be positive");
  if (cfg.plant.r_f < 0.0) fail("plant.r_f must be non-negative");
  if (cfg.plant.r_g < 0.0) fail("plant.r_g must be non-negative");
  if (cfg.plant.v_g_peak < 0.0) fail("plant.v_g_peak must be non-negative");
  if (!(cfg.plant.omega_g > 0.0)) fail("plant.omega_g must be positive");

  if (!(cfg.control.i_max_sat > 0.0)) fail("i_max_sat must be positive");
  if (!(cfg.control.omega_f > 0.0)) fail("omega_f must be positive");
  if (!(cfg.control.droop.omega_pp > 0.0)) {
    fail("droop.omega_pp must be positive");
  }
  if (!(cfg.control.droop.omega_ref > 0.0)) {
    fail("droop.omega_ref must be positive");
  }

  if (cfg.output.decimation < 0) fail("output.decimation must be >= 0");
}

int plant_steps_per_control_period(const ScenarioConfig& cfg) {
  return static_cast<int>(std::llround(cfg.dt_ctrl / cfg.dt_plant));
}

int effective_decimation(const ScenarioConfig& cfg) {
  if (cfg.output.decimation > 0) return cfg.output.decimation;
  const long long per_ms = std::llround(1e-3 / cfg.dt_ctrl);
  return static_cast<int>(std::max<long long>(1, per_ms));
}

}  // namespace gfm
