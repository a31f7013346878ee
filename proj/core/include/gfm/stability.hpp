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

#ifndef GFM_STABILITY_HPP_
#define GFM_STABILITY_HPP_

#include <cmath>
#include <stdexcept>
#include <vector>

// Quasi-static transient-stability analysis of the droop-controlled converter
// behind a lossless line reactance: power-angle curves with and without the
// current limiter, the equilibrium and critical angles they imply, and the
// droop-driven angle trajectory through a zero-power fault. The model keeps
// the converter and grid voltage magnitudes fixed and moves only the angle.

namespace gfm {

struct QuasiStaticParams {
  double v_c = 480.0 * std::sqrt(2.0 / 3.0);  // converter voltage (peak, V)
  double v_g = 480.0 * std::sqrt(2.0 / 3.0);  // grid voltage (peak, V)
  double x_line = 314.0 * 8e-3;               // line reactance (ohm)
  double p_ref = 30e3;                        // power setpoint (W)
  double k_p = 0.001;                         // droop gain (rad/s per W)
  double omega_0 = 314.0;                     // nominal frequency (rad/s)
  double omega_g = 314.0;                     // grid frequency (rad/s)
  double i_max_sat = 110.0;                   // current limit (A)
  double omega_pp = 35.0;                     // power filter cutoff (rad/s)
};

// Three-phase totals with peak-valued magnitudes, consistent with the
// time-domain power computation: P_max = 3/2 V_c V_g / X.
double p_max_normal(const QuasiStaticParams& params);
double p_max_saturated(const QuasiStaticParams& params);

// Transmitted power at angle delta on the unsaturated sine curve.
double p_delta_normal(double delta, const QuasiStaticParams& params);

// Transmitted power at angle delta with the current limited to I_max_sat and
// synchronized on the converter d-axis: P = P_max_sat cos(delta).
double p_delta_saturated(double delta, const QuasiStaticParams& params);

struct EquilibriumAngles {
  double delta_0;        // stable operating angle asin(P_ref / P_max)
  double delta_max;      // unsaturated critical angle pi - delta_0
  double delta_max_sat;  // saturated critical angle acos(P_ref / P_max_sat)
};

struct NoEquilibrium : std::domain_error {
  using std::domain_error::domain_error;
};

// Throws NoEquilibrium when P_ref exceeds either curve's deliverable power.
EquilibriumAngles equilibrium_angles(const QuasiStaticParams& params);

// Droop frequency while a fault holds P at zero: omega_c = k_P P_ref + omega_0.
double fault_frequency(const QuasiStaticParams& params);

// Magnitude of the current the unsaturated operating point at angle delta
// would require: |V_c e^{j delta} - V_g| / X.
double implied_current(double delta, const QuasiStaticParams& params);

// Smallest angle at which the implied current reaches I_max_sat, found by
// bisection; pi if the limit is never reached, 0 if always exceeded. The
// limiter is engaged exactly for |delta| beyond this angle.
double saturation_boundary_angle(const QuasiStaticParams& params);

enum class SwingMode { Normal, Saturated };

struct SwingSample {
  double t;
  double delta;
  double p;
  SwingMode mode;
};

struct SwingResult {
  std::vector<SwingSample> trajectory;
  bool stable = false;
  double clearing_angle = 0.0;  // delta when the fault clears (rad)
  double peak_angle = 0.0;      // largest delta reached (rad)
};

// Integrates d(delta)/dt = omega_c - omega_g from the pre-fault equilibrium,
// with omega_c following the droop law through the power filter. P(delta) is
// zero inside the fault window [0, fault_duration); afterwards it follows the
// saturated cosine curve while the implied current is at or above the limit
// (when with_saturation is set) and the sine curve otherwise.
SwingResult swing_simulate(const QuasiStaticParams& params,
                           double fault_duration, bool with_saturation,
                           double dt);

struct CriticalClearing {
  double t_cc;            // longest stable fault duration (s); inf if never lost
  double clearing_angle;  // delta at clearance for that duration (rad)
  double peak_angle;      // largest delta of that marginal stable run (rad)
};

// Bisection on swing_simulate's stable flag over the fault duration.
// resolution defaults well under the 1 ms reporting requirement so the
// marginal trajectory pins down the critical angle.
CriticalClearing critical_clearing_time(const QuasiStaticParams& params,
                                        bool with_saturation, double dt = 1e-5,
                                        double t_max = 10.0,
                                        double resolution = 1e-4);

}  // namespace gfm

#endif  // GFM_STABILITY_HPP_
