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

#include "gfm/vflux.hpp"

#include <cmath>

namespace gfm {

double flux_filter_step(double psi, double v, double omega_f, double dt) {
  return (psi + dt * v) / (1.0 + dt * omega_f);
}

void estimate_fluxes(const ThreePhase& m_abc, double v_dc,
                     const ThreePhase& v_g_meas, double dt,
                     FluxEstimatorState& state) {
  const double half = 0.5 * v_dc;
  const double wf = state.omega_f;
  state.psi_c_abc.a =
      flux_filter_step(state.psi_c_abc.a, m_abc.a * half, wf, dt);
  state.psi_c_abc.b =
      flux_filter_step(state.psi_c_abc.b, m_abc.b * half, wf, dt);
  state.psi_c_abc.c =
      flux_filter_step(state.psi_c_abc.c, m_abc.c * half, wf, dt);

  const ThreePhase& vp = state.have_v_g_prev ? state.v_g_prev : v_g_meas;
  state.psi_g_abc.a =
      flux_filter_step(state.psi_g_abc.a, 0.5 * (v_g_meas.a + vp.a), wf, dt);
  state.psi_g_abc.b =
      flux_filter_step(state.psi_g_abc.b, 0.5 * (v_g_meas.b + vp.b), wf, dt);
  state.psi_g_abc.c =
      flux_filter_step(state.psi_g_abc.c, 0.5 * (v_g_meas.c + vp.c), wf, dt);
  state.v_g_prev = v_g_meas;
  state.have_v_g_prev = true;
}

FluxDq flux_dq(const FluxEstimatorState& state, const Angle& theta) {
  const DqPair c = park(clarke(state.psi_c_abc), theta);
  const DqPair g = park(clarke(state.psi_g_abc), theta);
  FluxDq out;
  out.psi_cd = c.d;
  out.psi_cq = c.q;
  out.psi_gd = g.d;
  out.psi_gq = g.q;
  return out;
}

DqPair flux_currents(const FluxDq& flux, double l_f) {
  DqPair i;
  i.d = (flux.psi_cd - flux.psi_gd) / l_f;
  i.q = (flux.psi_cq - flux.psi_gq) / l_f;
  return i;
}

Angle flux_phase_angle(const DqPair& i_flux) {
  Angle phi;
  if (std::abs(i_flux.d) < 1e-6 && std::abs(i_flux.q) < 1e-6) {
    phi.rad = 0.0;
    return phi;
  }
  phi.rad = std::atan2(i_flux.q, i_flux.d);
  return phi;
}

}  // namespace gfm
