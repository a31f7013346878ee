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

#ifndef GFM_CONTROL_HPP_
#define GFM_CONTROL_HPP_

#include "gfm/signal.hpp"
#include "gfm/vflux.hpp"

// Grid-forming droop control with cascaded voltage and current loops.
//
//   P-omega / Q-v droop (first-order power filters)
//     -> voltage PI with current-reference limiting and integrator gating
//     -> current PI with dq decoupling and modulation clamping
//
// The limiter is pluggable: independent per-component clamps, amplitude
// clamping that keeps the reference angle, or amplitude clamping steered by
// the virtual-flux current angle.

namespace gfm {

struct DroopParams {
  double k_p = 0.001;        // frequency droop gain (rad/s per W)
  double k_q = 0.001;        // voltage droop gain (V per var)
  double omega_ref = 314.0;  // nominal frequency (rad/s)
  double v_ref = 480.0 * std::sqrt(2.0 / 3.0);  // nominal peak phase voltage (V)
  double p_ref = 30e3;       // active power setpoint (W)
  double q_ref = 0.0;        // reactive power setpoint (var)
  double omega_pp = 35.0;    // power-filter cutoff (rad/s)
};

struct DroopState {
  double p_filt = 0.0;   // filtered active power (W)
  double q_filt = 0.0;   // filtered reactive power (var)
  double omega_c = 0.0;  // droop frequency (rad/s)
  Angle theta_c;         // controller frame angle, unwrapped (rad)
};

struct PiState {
  double integrator = 0.0;
  double k_p_gain = 0.0;
  double k_i_gain = 0.0;
};

enum class SaturationStrategy {
  PerComponent,
  Amplitude,
  VirtualFlux,
};

struct SaturationOutcome {
  DqPair i_ref_sat;
  bool enable = true;  // gates the voltage-loop integrators (anti-windup)
};

struct PowerPair {
  double p = 0.0;
  double q = 0.0;
};

// Instantaneous three-phase power from dq quantities (amplitude-invariant
// frame, hence the 3/2): P = 3/2 (v_d i_d + v_q i_q), Q = 3/2 (v_q i_d - v_d i_q).
PowerPair compute_power(const DqPair& v_dq, const DqPair& i_dq);

// Advances the droop filters and frame angle one step; returns the d-axis
// voltage reference from the Q-v droop.
double droop_step(double p, double q, const DroopParams& params, double dt,
                  DroopState& state);

// Voltage PI in dq with capacitor-current decoupling and output-current
// feed-forward. The integrators accumulate only while enable is set.
DqPair voltage_loop(const DqPair& v_ref, const DqPair& v_meas,
                    const DqPair& i_out_dq, double omega_c, double c_f,
                    bool enable, double dt, PiState& pi_d, PiState& pi_q);

// Independent clamps per axis; the reference angle is distorted whenever only
// one axis clips.
SaturationOutcome saturate_per_component(const DqPair& i_ref, double i_d_max,
                                         double i_q_max);

// Clamp to the limit circle along the reference's own angle.
SaturationOutcome saturate_amplitude(const DqPair& i_ref, double i_max_sat);

// Clamp to the limit circle along the virtual-flux current angle.
SaturationOutcome saturate_vflux(const DqPair& i_ref, double i_max_sat,
                                 const Angle& phi_flux);

// Current PI in dq with voltage feed-forward and inductor decoupling; output
// is normalized by v_dc/2 and clamped to [-1, 1] per axis. An axis integrator
// holds while its output is clamped.
DqPair current_loop(const DqPair& i_ref, const DqPair& i_meas,
                    const DqPair& v_g_dq, double omega_c, double l_f,
                    double v_dc, double dt, PiState& pi_d, PiState& pi_q);

struct ControlParams {
  DroopParams droop;
  // Voltage loop gains (A/V and A/(V s)).
  double k_pv = 0.55;
  double k_iv = 500.0;
  // Current loop proportional gain. A continuous design would use hundreds of
  // V/A here, but the loop runs sampled at 10 kHz: each period the current
  // error is multiplied by (1 - k_pi*dt/l_f), so gains above 2*l_f/dt = 40
  // diverge outright. k_pi = l_f/dt = 20 zeroes that factor instead, settling
  // the current onto its reference in a single period (deadbeat), which is
  // the fastest a sampled loop can enforce the current limit. The closed loop
  // is insensitive to the exact value: anywhere in roughly the upper half of
  // the stable range behaves the same, so the deadbeat point is chosen for
  // being a natural constant of the hardware, not a tuned number.
  double k_pi = 20.0;    // current loop proportional gain (V/A)
  double k_ii = 5000.0;  // current loop integral gain (V/(A s))
  double l_f = 2e-3;
  double c_f = 60e-6;
  double v_dc = 1000.0;
  double i_max_sat = 110.0;               // current limit (A)
  double i_d_max = 110.0 / std::sqrt(2.0);  // per-component d clamp (A)
  double i_q_max = 110.0 / std::sqrt(2.0);  // per-component q clamp (A)
  double omega_f = 2.0 * std::numbers::pi;  // flux filter cutoff (rad/s)
  // Refresh period of the limiter angle and of the recorded angle traces,
  // matching the 10 kHz modulator update rate. The numerical control step may
  // be much finer; re-deriving the saturation angle from the flux estimate on
  // every fine step closes a self-referential loop (reference direction ->
  // injected current -> estimated direction) whose equilibrium is a parasitic
  // spin of the current vector.
  double dt_angle = 1e-4;
  SaturationStrategy strategy = SaturationStrategy::VirtualFlux;
};

struct Measurements {
  ThreePhase v_pcc;  // PCC phase voltages (V)
  ThreePhase i_f;    // converter filter currents (A)
  ThreePhase i_out;  // currents leaving the PCC toward load and grid (A)
};

// Values computed during the last controller step, for recording.
struct ControlDiagnostics {
  PowerPair power;
  DqPair v_g_dq;
  DqPair i_f_dq;
  DqPair i_out_dq;
  DqPair i_ref_unsat;
  DqPair i_ref_sat;
  DqPair m_dq;
  FluxDq flux;
  bool enable = true;
  Angle theta;             // frame angle all dq quantities above were taken at
  double omega_c = 0.0;    // frame frequency over the elapsed period (rad/s)
  Angle phi_conventional;  // unwrapped angle a per-axis clamp would command
  Angle phi_flux;          // unwrapped virtual-flux current angle
};

struct ControlState {
  DroopState droop;
  PiState pi_v_d;
  PiState pi_v_q;
  PiState pi_i_d;
  PiState pi_i_q;
  FluxEstimatorState flux;
  ThreePhase last_m;        // modulation held over the elapsed period
  bool enable_prev = true;  // limiter gate, applied one sample late
  Angle phi_flux_applied;   // held flux angle the limiter steers along
  double angle_timer = 0.0; // time since the last angle refresh (s)
  bool have_phi_prev = false;
  double phi_conv_raw_prev = 0.0;
  double phi_flux_raw_prev = 0.0;
  ControlDiagnostics diag;
};

ControlState make_control_state(const ControlParams& params);

// One control period: transforms measurements into the droop frame, advances
// droop, flux estimate, voltage loop, limiter and current loop, and returns
// the modulation indices to hold until the next call.
ThreePhase controller_step(const Measurements& meas,
                           const ControlParams& params, double dt,
                           ControlState& state);

}  // namespace gfm

#endif  // GFM_CONTROL_HPP_
