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

#include "gfm/plant.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace gfm {

namespace {

constexpr double kTwoThirdsPi = 2.0 * M_PI / 3.0;

// Parallel combination of the fault shunt and the PCC load.
double shunt_parallel_resistance(const PlantParams& params,
                                 const FaultDescriptor& fault) {
  return fault.fault_resistance * params.r_load /
         (fault.fault_resistance + params.r_load);
}

// The shunt is integrated in its quasi-static limit once its relaxation time
// is below half the step; explicit RK4 would be unstable well before that.
bool shunt_is_stiff(const PlantParams& params, const FaultDescriptor& fault,
                    double dt) {
  return dt > 0.5 * shunt_parallel_resistance(params, fault) * params.c_f;
}

bool shunt_active(const PlantState& state, const FaultDescriptor& fault) {
  return fault.kind == FaultKind::TwoPhaseShortToGround &&
         fault.active(state.t);
}

// Filter-inductor mesh. The bridge has three legs and no neutral conductor,
// so the filter currents must sum to zero; the floating bridge neutral takes
// on whatever potential enforces that, which is the common mode of the
// per-phase driving voltages. Capacitor, load, fault shunt, and grid source
// are star-grounded and stay per phase.
ThreePhase filter_mesh_derivs(const ThreePhase& i_f, const ThreePhase& v_c,
                              const ThreePhase& v_pcc,
                              const PlantParams& params) {
  const double u_a = v_c.a - v_pcc.a;
  const double u_b = v_c.b - v_pcc.b;
  const double u_c = v_c.c - v_pcc.c;
  const double common = (u_a + u_b + u_c) / 3.0;
  ThreePhase d;
  d.a = (u_a - common - params.r_f * i_f.a) / params.l_f;
  d.b = (u_b - common - params.r_f * i_f.b) / params.l_f;
  d.c = (u_c - common - params.r_f * i_f.c) / params.l_f;
  return d;
}

double node_deriv(double i_f, double v_g, double i_line,
                  double shunt_conductance, const PlantParams& params) {
  return (i_f - v_g / params.r_load - v_g * shunt_conductance - i_line) /
         params.c_f;
}

double line_deriv(double v_pcc, double i_line, double v_src,
                  const PlantParams& params) {
  return (v_pcc - params.r_g * i_line - v_src) / params.l_g;
}

// Derivatives with the shunt conductance fixed for a whole integration step.
// The RK4 stages must all see the same circuit topology: letting a stage
// re-evaluate the fault window at its own shifted time would apply the stiff
// shunt explicitly on the straddling step and blow up the capacitor states.
PlantDerivatives derivatives_fixed_shunt(const PlantState& state,
                                         const ThreePhase& v_c,
                                         const PlantParams& params,
                                         const FaultDescriptor& fault,
                                         double g_fault) {
  const ThreePhase v_src = grid_source(state.t, params, fault);
  PlantDerivatives out;
  out.di_f = filter_mesh_derivs(state.i_f, v_c, state.v_g, params);
  out.dv_g.a = node_deriv(state.i_f.a, state.v_g.a, state.i_line.a, 0.0,
                          params);
  out.dv_g.b = node_deriv(state.i_f.b, state.v_g.b, state.i_line.b, g_fault,
                          params);
  out.dv_g.c = node_deriv(state.i_f.c, state.v_g.c, state.i_line.c, g_fault,
                          params);
  out.di_line.a = line_deriv(state.v_g.a, state.i_line.a, v_src.a, params);
  out.di_line.b = line_deriv(state.v_g.b, state.i_line.b, v_src.b, params);
  out.di_line.c = line_deriv(state.v_g.c, state.i_line.c, v_src.c, params);
  return out;
}

// Derivatives with the faulted phases' capacitor voltages slaved to the
// quasi-static shunt value instead of the stored states. Their dv_g is
// reported as zero; step_plant re-seats those states after the step.
PlantDerivatives slaved_shunt_derivatives(const PlantState& state,
                                          const ThreePhase& v_c,
                                          const PlantParams& params,
                                          const FaultDescriptor& fault) {
  const ThreePhase v_src = grid_source(state.t, params, fault);
  const double r_par = shunt_parallel_resistance(params, fault);

  ThreePhase v_pcc = state.v_g;
  v_pcc.b = r_par * (state.i_f.b - state.i_line.b);
  v_pcc.c = r_par * (state.i_f.c - state.i_line.c);

  PlantDerivatives out;
  out.di_f = filter_mesh_derivs(state.i_f, v_c, v_pcc, params);
  out.dv_g.a = node_deriv(state.i_f.a, state.v_g.a, state.i_line.a, 0.0,
                          params);
  out.dv_g.b = 0.0;
  out.dv_g.c = 0.0;
  out.di_line.a = line_deriv(v_pcc.a, state.i_line.a, v_src.a, params);
  out.di_line.b = line_deriv(v_pcc.b, state.i_line.b, v_src.b, params);
  out.di_line.c = line_deriv(v_pcc.c, state.i_line.c, v_src.c, params);
  return out;
}

PlantState add_scaled(const PlantState& s, const PlantDerivatives& d,
                      double h) {
  PlantState r;
  r.t = s.t + h;
  r.i_f = {s.i_f.a + h * d.di_f.a, s.i_f.b + h * d.di_f.b,
           s.i_f.c + h * d.di_f.c};
  r.v_g = {s.v_g.a + h * d.dv_g.a, s.v_g.b + h * d.dv_g.b,
           s.v_g.c + h * d.dv_g.c};
  r.i_line = {s.i_line.a + h * d.di_line.a, s.i_line.b + h * d.di_line.b,
              s.i_line.c + h * d.di_line.c};
  return r;
}

}  // namespace

ThreePhase grid_source(double t, const PlantParams& params,
                       const FaultDescriptor& fault) {
  double scale = 1.0;
  double shift = 0.0;
  if (fault.active(t)) {
    if (fault.kind == FaultKind::ThreePhaseSag) {
      scale = 1.0 - fault.sag_fraction;
    } else if (fault.kind == FaultKind::ThreePhaseShift) {
      shift = fault.shift_angle;
    }
  }
  const double phi = params.omega_g * t + shift;
  ThreePhase v;
  v.a = scale * params.v_g_peak * std::cos(phi);
  v.b = scale * params.v_g_peak * std::cos(phi - kTwoThirdsPi);
  v.c = scale * params.v_g_peak * std::cos(phi - 2.0 * kTwoThirdsPi);
  return v;
}

ThreePhase converter_bridge(const ThreePhase& m_abc, double v_dc) {
  const double half = 0.5 * v_dc;
  ThreePhase v;
  v.a = std::clamp(m_abc.a, -1.0, 1.0) * half;
  v.b = std::clamp(m_abc.b, -1.0, 1.0) * half;
  v.c = std::clamp(m_abc.c, -1.0, 1.0) * half;
  return v;
}

PlantDerivatives plant_derivatives(const PlantState& state,
                                   const ThreePhase& v_c,
                                   const PlantParams& params,
                                   const FaultDescriptor& fault) {
  const double g_fault =
      shunt_active(state, fault) ? 1.0 / fault.fault_resistance : 0.0;
  return derivatives_fixed_shunt(state, v_c, params, fault, g_fault);
}

PlantState step_plant(const PlantState& state, const ThreePhase& v_c,
                      const PlantParams& params, const FaultDescriptor& fault,
                      double dt) {
  // Fault topology is frozen for the step at its starting time; transitions
  // take effect on the following step boundary.
  const bool engaged = shunt_active(state, fault);
  const bool slaved = engaged && shunt_is_stiff(params, fault, dt);
  const double g_fault =
      engaged && !slaved ? 1.0 / fault.fault_resistance : 0.0;
  const auto rhs = [&](const PlantState& s) {
    return slaved ? slaved_shunt_derivatives(s, v_c, params, fault)
                  : derivatives_fixed_shunt(s, v_c, params, fault, g_fault);
  };

  const PlantDerivatives k1 = rhs(state);
  const PlantDerivatives k2 = rhs(add_scaled(state, k1, 0.5 * dt));
  const PlantDerivatives k3 = rhs(add_scaled(state, k2, 0.5 * dt));
  const PlantDerivatives k4 = rhs(add_scaled(state, k3, dt));

  PlantState next = state;
  next.t = state.t + dt;
  const double h = dt / 6.0;
  next.i_f.a += h * (k1.di_f.a + 2.0 * k2.di_f.a + 2.0 * k3.di_f.a + k4.di_f.a);
  next.i_f.b += h * (k1.di_f.b + 2.0 * k2.di_f.b + 2.0 * k3.di_f.b + k4.di_f.b);
  next.i_f.c += h * (k1.di_f.c + 2.0 * k2.di_f.c + 2.0 * k3.di_f.c + k4.di_f.c);
  next.v_g.a += h * (k1.dv_g.a + 2.0 * k2.dv_g.a + 2.0 * k3.dv_g.a + k4.dv_g.a);
  next.v_g.b += h * (k1.dv_g.b + 2.0 * k2.dv_g.b + 2.0 * k3.dv_g.b + k4.dv_g.b);
  next.v_g.c += h * (k1.dv_g.c + 2.0 * k2.dv_g.c + 2.0 * k3.dv_g.c + k4.dv_g.c);
  next.i_line.a +=
      h * (k1.di_line.a + 2.0 * k2.di_line.a + 2.0 * k3.di_line.a +
           k4.di_line.a);
  next.i_line.b +=
      h * (k1.di_line.b + 2.0 * k2.di_line.b + 2.0 * k3.di_line.b +
           k4.di_line.b);
  next.i_line.c +=
      h * (k1.di_line.c + 2.0 * k2.di_line.c + 2.0 * k3.di_line.c +
           k4.di_line.c);

  if (slaved) {
    const double r_par = shunt_parallel_resistance(params, fault);
    next.v_g.b = r_par * (next.i_f.b - next.i_line.b);
    next.v_g.c = r_par * (next.i_f.c - next.i_line.c);
  }
  return next;
}

ThreePhase pcc_voltage(const PlantState& state, const PlantParams& params,
                       const FaultDescriptor& fault, double dt) {
  ThreePhase v = state.v_g;
  if (shunt_active(state, fault) && shunt_is_stiff(params, fault, dt)) {
    const double r_par = shunt_parallel_resistance(params, fault);
    v.b = r_par * (state.i_f.b - state.i_line.b);
    v.c = r_par * (state.i_f.c - state.i_line.c);
  }
  return v;
}

ThreePhase load_current(const ThreePhase& v_pcc, const PlantParams& params) {
  return {v_pcc.a / params.r_load, v_pcc.b / params.r_load,
          v_pcc.c / params.r_load};
}

ThreePhase pcc_outflow(const PlantState& state, const PlantParams& params,
                       const FaultDescriptor& fault, double dt) {
  const ThreePhase v = pcc_voltage(state, params, fault, dt);
  ThreePhase out{v.a / params.r_load + state.i_line.a,
                 v.b / params.r_load + state.i_line.b,
                 v.c / params.r_load + state.i_line.c};
  if (shunt_active(state, fault)) {
    if (shunt_is_stiff(params, fault, dt)) {
      // Pinned capacitor voltage: no capacitor current, so the node passes
      // the converter current straight through.
      out.b = state.i_f.b;
      out.c = state.i_f.c;
    } else {
      out.b += v.b / fault.fault_resistance;
      out.c += v.c / fault.fault_resistance;
    }
  }
  return out;
}

PlantState grid_energized_state(const PlantParams& params) {
  // Phasor solve with the converter branch open: source behind R_g + jwL_g
  // into the load shunted by the filter capacitor.
  const std::complex<double> jw(0.0, params.omega_g);
  const std::complex<double> z_g = params.r_g + jw * params.l_g;
  const std::complex<double> y_node =
      1.0 / params.r_load + jw * params.c_f;
  const std::complex<double> v_pcc = params.v_g_peak / (1.0 + z_g * y_node);
  const std::complex<double> i_line = (v_pcc - params.v_g_peak) / z_g;

  PlantState s;
  s.v_g = balanced_snapshot(v_pcc);
  s.i_line = balanced_snapshot(i_line);
  return s;
}

bool within_divergence_guard(const PlantState& state,
                             const PlantParams& params) {
  const double v_scale = std::max({params.v_g_peak, 0.5 * params.v_dc, 1.0});
  const double z_char = std::max(
      std::hypot(params.r_g, params.omega_g * params.l_g), 1e-6);
  const double i_scale = std::max(v_scale / z_char, 1.0);
  const double v_limit = 100.0 * v_scale;
  const double i_limit = 100.0 * i_scale;

  const double currents[6] = {state.i_f.a, state.i_f.b, state.i_f.c,
                              state.i_line.a, state.i_line.b, state.i_line.c};
  for (double i : currents) {
    if (!std::isfinite(i) || std::abs(i) > i_limit) return false;
  }
  const double volts[3] = {state.v_g.a, state.v_g.b, state.v_g.c};
  for (double v : volts) {
    if (!std::isfinite(v) || std::abs(v) > v_limit) return false;
  }
  return true;
}

}  // namespace gfm
