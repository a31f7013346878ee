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

#ifndef GFM_PLANT_HPP_
#define GFM_PLANT_HPP_

#include "gfm/signal.hpp"

// Averaged electrical model of a grid-connected converter, simulated per phase
// in the abc frame so unbalanced faults need no special casing:
//
//   converter bridge -- L_f/R_f -- PCC node (C_f, load R_L, fault shunt) --
//   L_g/R_g -- grid voltage source
//
// States are the three filter currents, three PCC capacitor voltages and three
// line currents. Integration is classical fixed-step RK4.

namespace gfm {

struct PlantParams {
  double l_f = 2e-3;        // converter filter inductance (H)
  double r_f = 1e-3;        // filter series resistance (ohm)
  double c_f = 60e-6;       // filter capacitance (F)
  double l_g = 8e-3;        // grid coupling inductance (H)
  double r_g = 100e-3;      // grid coupling resistance (ohm)
  double r_load = 10.0;     // per-phase load at the PCC (ohm)
  double v_dc = 1000.0;     // DC bus voltage (V)
  double v_g_peak = 480.0 * std::sqrt(2.0 / 3.0);  // grid peak phase voltage (V)
  double omega_g = 314.0;   // grid angular frequency (rad/s)
};

struct PlantState {
  double t = 0.0;      // simulation time (s)
  ThreePhase i_f;      // converter filter currents (A)
  ThreePhase v_g;      // PCC capacitor voltages (V)
  ThreePhase i_line;   // currents into the grid branch (A)
};

enum class FaultKind {
  None,
  ThreePhaseSag,            // grid source scaled by (1 - sag_fraction)
  TwoPhaseShortToGround,    // resistive shunt to ground on phases b and c
  ThreePhaseShift,          // grid source angle advanced by shift_angle
};

struct FaultDescriptor {
  FaultKind kind = FaultKind::None;
  double start = 0.0;              // fault application time (s)
  double duration = 0.0;           // fault window length (s)
  double sag_fraction = 1.0;       // 1.0 = full sag to zero
  double fault_resistance = 1e-3;  // shunt resistance to ground (ohm)
  double shift_angle = M_PI / 2.0; // source phase advance (rad)

  bool active(double t) const {
    return kind != FaultKind::None && t >= start && t < start + duration;
  }
};

// Grid source phase voltages at time t, with sag / phase-shift faults applied
// inside the fault window. The short-to-ground fault acts at the PCC, not on
// the source, so it leaves this function untouched.
ThreePhase grid_source(double t, const PlantParams& params,
                       const FaultDescriptor& fault);

// Averaged bridge output: v_c = m * v_dc / 2 with each modulation index
// clamped to [-1, 1].
ThreePhase converter_bridge(const ThreePhase& m_abc, double v_dc);

// Right-hand side of the plant ODE (d/dt of i_f, v_g, i_line per phase).
// The short-to-ground shunt appears literally as an extra v/R_fault term;
// step_plant decides when that term is too stiff to integrate explicitly.
struct PlantDerivatives {
  ThreePhase di_f;
  ThreePhase dv_g;
  ThreePhase di_line;
};

PlantDerivatives plant_derivatives(const PlantState& state,
                                   const ThreePhase& v_c,
                                   const PlantParams& params,
                                   const FaultDescriptor& fault);

// One RK4 step of length dt with the converter voltage held constant.
//
// A bolted shunt (default 1 mohm on 60 uF) has a relaxation time of ~60 ns,
// far below any sensible step, and explicit RK4 is unstable on it at any
// practical dt. When the shunt time constant is under half the step the
// faulted phases' capacitor voltages are advanced by their quasi-static limit
// v = (R_fault || R_L) * (i_f - i_line) instead, which the stiff dynamics
// reach within nanoseconds; everything else stays on RK4.
PlantState step_plant(const PlantState& state, const ThreePhase& v_c,
                      const PlantParams& params, const FaultDescriptor& fault,
                      double dt);

// Effective phase voltages at the PCC: the capacitor states, except on phases
// held at the quasi-static shunt value during a bolted short.
ThreePhase pcc_voltage(const PlantState& state, const PlantParams& params,
                       const FaultDescriptor& fault, double dt);

// Per-phase load currents v_pcc / R_L.
ThreePhase load_current(const ThreePhase& v_pcc, const PlantParams& params);

// Per-phase current leaving the PCC node toward load, fault shunt, and grid:
// what a feeder sensor at the bus reads. On phases held at the quasi-static
// shunt value the capacitor current vanishes, so the outflow equals the full
// converter current.
ThreePhase pcc_outflow(const PlantState& state, const PlantParams& params,
                       const FaultDescriptor& fault, double dt);

// Steady state of the grid feeding the load and filter capacitors with the
// converter idle (i_f = 0), evaluated at t = 0: the circuit a converter sees
// the moment it connects to an energized grid.
PlantState grid_energized_state(const PlantParams& params);

// False once any state magnitude exceeds 100x its nominal scale or stops
// being finite; the simulation harness aborts such runs as diverged.
bool within_divergence_guard(const PlantState& state,
                             const PlantParams& params);

}  // namespace gfm

#endif  // GFM_PLANT_HPP_
