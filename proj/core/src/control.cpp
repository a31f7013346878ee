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

#include "gfm/control.hpp"

#include <algorithm>
#include <cmath>

namespace gfm {

namespace {

// Accumulate the previous raw sample's angular increment onto an unwrapped
// angle so traces can be differenced without 2*pi jumps.
double unwrap_accumulate(double unwrapped_prev, double raw_prev, double raw) {
  return unwrapped_prev + std::remainder(raw - raw_prev, 2.0 * M_PI);
}

}  // namespace

PowerPair compute_power(const DqPair& v_dq, const DqPair& i_dq) {
  PowerPair s;
  s.p = 1.5 * (v_dq.d * i_dq.d + v_dq.q * i_dq.q);
  s.q = 1.5 * (v_dq.q * i_dq.d - v_dq.d * i_dq.q);
  return s;
}

double droop_step(double p, double q, const DroopParams& params, double dt,
                  DroopState& state) {
  state.p_filt += dt * params.omega_pp * (p - state.p_filt);
  state.q_filt += dt * params.omega_pp * (q - state.q_filt);
  state.omega_c = params.omega_ref + params.k_p * (params.p_ref - state.p_filt);
  state.theta_c.rad += dt * state.omega_c;
  return params.v_ref + params.k_q * (params.q_ref - state.q_filt);
}

DqPair voltage_loop(const DqPair& v_ref, const DqPair& v_meas,
                    const DqPair& i_out_dq, double omega_c, double c_f,
                    bool enable, double dt, PiState& pi_d, PiState& pi_q) {
  const double e_d = v_ref.d - v_meas.d;
  const double e_q = v_ref.q - v_meas.q;
  if (enable) {
    pi_d.integrator += dt * pi_d.k_i_gain * e_d;
    pi_q.integrator += dt * pi_q.k_i_gain * e_q;
  }
  DqPair i_ref;
  i_ref.d = pi_d.k_p_gain * e_d + pi_d.integrator + i_out_dq.d -
            omega_c * c_f * v_meas.q;
  i_ref.q = pi_q.k_p_gain * e_q + pi_q.integrator + i_out_dq.q +
            omega_c * c_f * v_meas.d;
  return i_ref;
}

SaturationOutcome saturate_per_component(const DqPair& i_ref, double i_d_max,
                                         double i_q_max) {
  SaturationOutcome out;
  out.i_ref_sat.d = std::clamp(i_ref.d, -i_d_max, i_d_max);
  out.i_ref_sat.q = std::clamp(i_ref.q, -i_q_max, i_q_max);
  out.enable = (out.i_ref_sat.d == i_ref.d) && (out.i_ref_sat.q == i_ref.q);
  return out;
}

SaturationOutcome saturate_amplitude(const DqPair& i_ref, double i_max_sat) {
  SaturationOutcome out;
  const double mag = std::hypot(i_ref.d, i_ref.q);
  if (mag > i_max_sat) {
    const double phi = std::atan2(i_ref.q, i_ref.d);
    out.i_ref_sat.d = i_max_sat * std::cos(phi);
    out.i_ref_sat.q = i_max_sat * std::sin(phi);
  } else {
    out.i_ref_sat = i_ref;
  }
  out.enable = mag < i_max_sat;
  return out;
}

SaturationOutcome saturate_vflux(const DqPair& i_ref, double i_max_sat,
                                 const Angle& phi_flux) {
  SaturationOutcome out;
  const double mag = std::hypot(i_ref.d, i_ref.q);
  if (mag > i_max_sat) {
    out.i_ref_sat.d = i_max_sat * std::cos(phi_flux.rad);
    out.i_ref_sat.q = i_max_sat * std::sin(phi_flux.rad);
  } else {
    out.i_ref_sat = i_ref;
  }
  out.enable = mag < i_max_sat;
  return out;
}

DqPair current_loop(const DqPair& i_ref, const DqPair& i_meas,
                    const DqPair& v_g_dq, double omega_c, double l_f,
                    double v_dc, double dt, PiState& pi_d, PiState& pi_q) {
  const double half = 0.5 * v_dc;
  const double e_d = i_ref.d - i_meas.d;
  const double e_q = i_ref.q - i_meas.q;

  // Trial integrator values; kept only if the axis output stays unclamped.
  const double int_d = pi_d.integrator + dt * pi_d.k_i_gain * e_d;
  const double int_q = pi_q.integrator + dt * pi_q.k_i_gain * e_q;
  const double u_d =
      pi_d.k_p_gain * e_d + int_d + v_g_dq.d - omega_c * l_f * i_meas.q;
  const double u_q =
      pi_q.k_p_gain * e_q + int_q + v_g_dq.q + omega_c * l_f * i_meas.d;

  DqPair m;
  m.d = u_d / half;
  m.q = u_q / half;
  if (m.d > 1.0 || m.d < -1.0) {
    m.d = std::clamp(m.d, -1.0, 1.0);
  } else {
    pi_d.integrator = int_d;
  }
  if (m.q > 1.0 || m.q < -1.0) {
    m.q = std::clamp(m.q, -1.0, 1.0);
  } else {
    pi_q.integrator = int_q;
  }
  return m;
}

ControlState make_control_state(const ControlParams& params) {
  ControlState s;
  // Droop filters start at their setpoints: the converter connects
  // synchronized, at nominal frequency, not black-starting against the grid.
  s.droop.p_filt = params.droop.p_ref;
  s.droop.q_filt = params.droop.q_ref;
  s.droop.omega_c = params.droop.omega_ref;
  s.pi_v_d.k_p_gain = params.k_pv;
  s.pi_v_d.k_i_gain = params.k_iv;
  s.pi_v_q = s.pi_v_d;
  s.pi_i_d.k_p_gain = params.k_pi;
  s.pi_i_d.k_i_gain = params.k_ii;
  s.pi_i_q = s.pi_i_d;
  s.flux.omega_f = params.omega_f;
  return s;
}

ThreePhase controller_step(const Measurements& meas,
                           const ControlParams& params, double dt,
                           ControlState& state) {
  const Angle theta = state.droop.theta_c;

  const DqPair v_g_dq = park(clarke(meas.v_pcc), theta);
  const DqPair i_f_dq = park(clarke(meas.i_f), theta);
  const DqPair i_out_dq = park(clarke(meas.i_out), theta);

  // Flux estimate first: last_m is the modulation the bridge held over the
  // period that just elapsed.
  estimate_fluxes(state.last_m, params.v_dc, meas.v_pcc, dt, state.flux);
  const FluxDq flux = flux_dq(state.flux, theta);
  const DqPair i_flux = flux_currents(flux, params.l_f);
  const Angle phi_flux_raw = flux_phase_angle(i_flux);

  // The limiter angle refreshes at the modulator update rate, which may be
  // far coarser than the numerical control step. Re-deriving it on every
  // fine step would close a self-referential loop: the reference direction
  // sets the injected current, which sets the estimated direction one step
  // later, and the estimator's first-order integral approximation gives that
  // loop a small phase lead at every frequency, so the only equilibrium is a
  // parasitic spin of the current vector at a rate set by the loop delay.
  state.angle_timer += dt;
  const bool angle_sample = state.angle_timer + 0.25 * dt >= params.dt_angle;
  if (angle_sample) {
    state.angle_timer = std::max(0.0, state.angle_timer - params.dt_angle);
    // Refresh only while the flux-difference current is consistent with the
    // measured one; a collapsed estimate is dominated by its own settling
    // transient and its angle no longer describes the current.
    const double i_meas_mag = std::hypot(i_f_dq.d, i_f_dq.q);
    const double i_flux_mag = std::hypot(i_flux.d, i_flux.q);
    if (i_flux_mag >= 0.5 * i_meas_mag || i_meas_mag < 1.0) {
      state.phi_flux_applied = phi_flux_raw;
    }
  }

  // Droop power is the converter's own output, metered at the PCC with the
  // converter current. The feeder current is the wrong meter here: it is not
  // bounded by the current limit, and a post-fault ring of the grid branch
  // can then hold the filtered power pinned far from the reference, parking
  // the droop frequency away from the grid with no way back.
  const PowerPair power = compute_power(v_g_dq, i_f_dq);
  const double v_d_ref = droop_step(power.p, power.q, params.droop, dt,
                                    state.droop);

  const DqPair i_ref_unsat =
      voltage_loop({v_d_ref, 0.0}, v_g_dq, i_out_dq, state.droop.omega_c,
                   params.c_f, state.enable_prev, dt, state.pi_v_d,
                   state.pi_v_q);

  SaturationOutcome sat;
  switch (params.strategy) {
    case SaturationStrategy::PerComponent:
      sat = saturate_per_component(i_ref_unsat, params.i_d_max,
                                   params.i_q_max);
      break;
    case SaturationStrategy::Amplitude:
      sat = saturate_amplitude(i_ref_unsat, params.i_max_sat);
      break;
    case SaturationStrategy::VirtualFlux:
      sat = saturate_vflux(i_ref_unsat, params.i_max_sat,
                           state.phi_flux_applied);
      break;
  }
  state.enable_prev = sat.enable;

  const DqPair m_dq =
      current_loop(sat.i_ref_sat, i_f_dq, v_g_dq, state.droop.omega_c,
                   params.l_f, params.v_dc, dt, state.pi_i_d, state.pi_i_q);
  const ThreePhase m_abc = inverse_clarke(inverse_park(m_dq, theta));
  // The bridge cannot realize a per-phase reference beyond the carrier, so
  // the value held for the flux estimator is the clamped one; the dq-axis
  // clamps above still admit phase peaks up to sqrt(2) before this bound.
  state.last_m.a = std::clamp(m_abc.a, -1.0, 1.0);
  state.last_m.b = std::clamp(m_abc.b, -1.0, 1.0);
  state.last_m.c = std::clamp(m_abc.c, -1.0, 1.0);

  // Both angle traces advance on the same refresh boundaries, so differencing
  // successive changes measures their step-to-step movement at the modulator
  // rate rather than at the fine numerical step. The conventional trace is
  // the direction a per-axis clamp would command for this same reference:
  // that clamp rotates the vector whenever one axis pins, so its angle is
  // the one the smoothness comparison is about, not the raw loop output.
  ControlDiagnostics& d = state.diag;
  if (angle_sample) {
    const SaturationOutcome conv = saturate_per_component(
        i_ref_unsat, params.i_d_max, params.i_q_max);
    const double phi_conv_raw =
        magnitude_phase(conv.i_ref_sat).phase.rad;
    if (state.have_phi_prev) {
      d.phi_conventional.rad = unwrap_accumulate(
          d.phi_conventional.rad, state.phi_conv_raw_prev, phi_conv_raw);
      d.phi_flux.rad = unwrap_accumulate(d.phi_flux.rad,
                                         state.phi_flux_raw_prev,
                                         phi_flux_raw.rad);
    } else {
      d.phi_conventional.rad = phi_conv_raw;
      d.phi_flux.rad = phi_flux_raw.rad;
      state.have_phi_prev = true;
    }
    state.phi_conv_raw_prev = phi_conv_raw;
    state.phi_flux_raw_prev = phi_flux_raw.rad;
  }

  d.power = power;
  d.theta = theta;
  d.omega_c = state.droop.omega_c;
  d.v_g_dq = v_g_dq;
  d.i_f_dq = i_f_dq;
  d.i_out_dq = i_out_dq;
  d.i_ref_unsat = i_ref_unsat;
  d.i_ref_sat = sat.i_ref_sat;
  d.m_dq = m_dq;
  d.flux = flux;
  d.enable = sat.enable;
  return m_abc;
}

}  // namespace gfm
