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

#ifndef GFM_EMIT_HPP_
#define GFM_EMIT_HPP_

#include <string>
#include <vector>

#include "gfm/simulation.hpp"

// Output emitters: CSV time series, self-contained SVG line plots, and a JSON
// metrics report. All writes throw std::runtime_error carrying the path on
// I/O failure. Numbers are printed with shortest round-trip formatting, so
// identical runs produce bitwise-identical files.

namespace gfm {

// Fixed CSV column order; the header row written by emit_csv.
inline constexpr char kCsvHeader[] =
    "t,v_pcc_a,v_pcc_b,v_pcc_c,i_f_a,i_f_b,i_f_c,"
    "i_line_a,i_line_b,i_line_c,p,q,omega_c,theta_c,"
    "i_d_ref,i_q_ref,i_d_ref_sat,i_q_ref_sat,enable,"
    "phi_conventional,phi_flux,psi_cd,psi_cq,psi_gd,psi_gq";

void emit_csv(const std::vector<SimRecord>& records, const std::string& path);

// Writes <prefix>_overview.svg (PCC voltages and filter currents),
// <prefix>_dq_currents.svg (measured dq currents vs limited references),
// <prefix>_power_freq.svg (P and omega_c) and <prefix>_angles.svg
// (conventional vs virtual-flux angle).
void emit_svg_plots(const std::vector<SimRecord>& records,
                    const std::string& path_prefix);

// Machine-readable metrics document (JSON) with the scenario echo and the
// process exit code the run maps to.
void emit_report(const ScenarioConfig& cfg, const RunMetrics& metrics,
                 const RunExtras& extras, const std::string& path);

// Plain-text side-by-side table for strategy comparisons.
std::string render_comparison_table(const std::vector<StrategyComparison>& rows);

}  // namespace gfm

#endif  // GFM_EMIT_HPP_
