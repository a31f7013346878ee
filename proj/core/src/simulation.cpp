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

#include "gfm/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace gfm {

namespace {

double peak_abs(const ThreePhase& x) {
  return std::max({std::abs(x.a), std::abs(x.b), std::abs(x.c)});
}

// Steady operating point the converter holds before the run begins. In
// equilibrium the droop pins omega_c to the grid frequency, which fixes the
// converter output power, and the PCC voltage magnitude sits on the Q-droop
// curve. Solved as a small power flow: Newton on the PCC angle for the power
// balance, fixed point on the magnitude for the droop.
struct OperatingPoint {
  std::complex<double> v_pcc;  // PCC voltage phasor, grid source at angle 0
  std::complex<double> i_line; // line current phasor, export positive
  std::complex<double> i_f;    // converter current phasor
  double p = 0.0;  // converter output active power at the solution (W)
  double q = 0.0;  // converter output reactive power at the solution (var)
};

OperatingPoint solve_operating_point(const PlantParams& pp,
                                     const DroopParams& dp) {
  const std::complex<double> jw(0.0, pp.omega_g);
  const std::complex<double> z_g = pp.r_g + jw * pp.l_g;
  const double p_target =
      dp.k_p > 0.0 ? dp.p_ref + (dp.omega_ref - pp.omega_g) / dp.k_p
                   : dp.p_ref;

  // Converter output power at the PCC: the droop's measured quantity. The
  // converter current is the line export plus the local load and capacitor
  // branches.
  const auto converter_power = [&](double mag, double ang) {
    const std::complex<double> v = std::polar(mag, ang);
    const std::complex<double> i_f =
        (v - pp.v_g_peak) / z_g + v / pp.r_load + jw * pp.c_f * v;
    return 1.5 * v * std::conj(i_f);
  };

  double mag = dp.v_ref;
  double ang = 0.0;
  std::complex<double> s;
  for (int outer = 0; outer < 40; ++outer) {
    for (int inner = 0; inner < 40; ++inner) {
      s = converter_power(mag, ang);
      const double f = s.real() - p_target;
      if (std::abs(f) < 1e-7 * std::max(std::abs(p_target), 1.0)) break;
      const double h = 1e-7;
      const double dfda = (converter_power(mag, ang + h).real() - s.real()) / h;
      if (!(std::abs(dfda) > 1e-9)) break;
      // Keep the solution on the stable side of the power-angle curve.
      ang = std::clamp(ang - f / dfda, -M_PI / 2.0, M_PI / 2.0);
    }
    s = converter_power(mag, ang);
    const double mag_next = dp.v_ref + dp.k_q * (dp.q_ref - s.imag());
    if (std::abs(mag_next - mag) < 1e-10 * dp.v_ref) {
      mag = mag_next;
      break;
    }
    mag = mag_next;
  }

  OperatingPoint op;
  op.v_pcc = std::polar(mag, ang);
  op.i_line = (op.v_pcc - pp.v_g_peak) / z_g;
  op.i_f = op.i_line + op.v_pcc / pp.r_load + jw * pp.c_f * op.v_pcc;
  s = 1.5 * op.v_pcc * std::conj(op.i_f);
  op.p = s.real();
  op.q = s.imag();
  return op;
}

// Instantiates plant and controller at the solved operating point: every
// state starts on the same steady orbit, so a no-fault run holds station from
// the first sample instead of riding out a connection transient. The dq
// projection of a phasor in the frame anchored at angle phi is the complex
// number phasor * exp(-j*phi) with d = real, q = imag.
void synchronized_start(const ScenarioConfig& cfg, PlantState& plant,
                        ControlState& control) {
  const PlantParams& pp = cfg.plant;
  const ControlParams& cp = cfg.control;
  const OperatingPoint op = solve_operating_point(pp, cp.droop);

  const std::complex<double> jw(0.0, pp.omega_g);
  const std::complex<double> i_f = op.i_f;
  const std::complex<double> v_c =
      op.v_pcc + (pp.r_f + jw * pp.l_f) * i_f;

  plant = PlantState{};
  plant.v_g = balanced_snapshot(op.v_pcc);
  plant.i_line = balanced_snapshot(op.i_line);
  plant.i_f = balanced_snapshot(i_f);

  control = make_control_state(cp);
  const double phi = std::arg(op.v_pcc);
  const std::complex<double> rot = std::polar(1.0, -phi);
  const std::complex<double> v_dq = op.v_pcc * rot;
  const std::complex<double> i_f_dq = i_f * rot;
  const std::complex<double> i_out_dq =
      (op.i_line + op.v_pcc / pp.r_load) * rot;
  const std::complex<double> v_c_dq = v_c * rot;

  control.droop.theta_c.rad = phi;
  control.droop.omega_c = pp.omega_g;
  control.droop.p_filt =
      cp.droop.k_p > 0.0
          ? cp.droop.p_ref + (cp.droop.omega_ref - pp.omega_g) / cp.droop.k_p
          : op.p;
  control.droop.q_filt = op.q;

  // Each integrator absorbs whatever its loop's feedforward and decoupling
  // terms miss at the operating point, so the loops start with zero error.
  const double w = pp.omega_g;
  control.pi_v_d.integrator =
      i_f_dq.real() - (i_out_dq.real() - w * cp.c_f * v_dq.imag());
  control.pi_v_q.integrator =
      i_f_dq.imag() - (i_out_dq.imag() + w * cp.c_f * v_dq.real());
  control.pi_i_d.integrator =
      v_c_dq.real() - (v_dq.real() - w * cp.l_f * i_f_dq.imag());
  control.pi_i_q.integrator =
      v_c_dq.imag() - (v_dq.imag() + w * cp.l_f * i_f_dq.real());

  // Modulation the bridge held over the period before t = 0, and the leaky
  // flux integrals of both voltages, all on the same steady orbit.
  const DqPair m_dq{v_c_dq.real() / (0.5 * cp.v_dc),
                    v_c_dq.imag() / (0.5 * cp.v_dc), 0.0};
  control.last_m = inverse_clarke(inverse_park(m_dq, Angle{phi}));
  control.phi_flux_applied.rad = std::atan2(i_f_dq.imag(), i_f_dq.real());
  const std::complex<double> flux_pole = jw + control.flux.omega_f;
  control.flux.psi_c_abc = balanced_snapshot(v_c / flux_pole);
  control.flux.psi_g_abc = balanced_snapshot(op.v_pcc / flux_pole);
}

SimRecord make_record(double t, const Measurements& meas,
                      const ThreePhase& i_line,
                      const ControlDiagnostics& diag) {
  SimRecord r;
  r.t = t;
  r.v_pcc = meas.v_pcc;
  r.i_f = meas.i_f;
  r.i_line = i_line;
  r.p = diag.power.p;
  r.q = diag.power.q;
  r.omega_c = diag.omega_c;
  r.theta_c = diag.theta.rad;
  r.i_d_ref = diag.i_ref_unsat.d;
  r.i_q_ref = diag.i_ref_unsat.q;
  r.i_d_ref_sat = diag.i_ref_sat.d;
  r.i_q_ref_sat = diag.i_ref_sat.q;
  r.enable = diag.enable;
  r.phi_conventional = diag.phi_conventional.rad;
  r.phi_flux = diag.phi_flux.rad;
  r.psi_cd = diag.flux.psi_cd;
  r.psi_cq = diag.flux.psi_cq;
  r.psi_gd = diag.flux.psi_gd;
  r.psi_gq = diag.flux.psi_gq;
  return r;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
  validate_config(cfg);
  const int n_sub = plant_steps_per_control_period(cfg);
  const int decimation = effective_decimation(cfg);
  const long long n_ctrl =
      static_cast<long long>(std::ceil(cfg.t_end / cfg.dt_ctrl - 1e-9));

  RunResult result;
  result.records.reserve(
      static_cast<size_t>(n_ctrl / std::max(decimation, 1) + 2));

  // The run starts at the synchronized operating point: a grid-forming
  // converter closes onto the grid phase-locked and loaded, so droop, both
  // PI layers, flux estimates and plant all begin on the same steady orbit.
  PlantState plant;
  ControlState control;
  synchronized_start(cfg, plant, control);

  const bool has_fault = cfg.fault.kind != FaultKind::None;
  const double onset = cfg.fault.start;
  const double clearance =
      has_fault ? cfg.fault.start + cfg.fault.duration : 0.0;
  const double p_ref = cfg.control.droop.p_ref;
  const double omega_ref = cfg.control.droop.omega_ref;

  bool diverged = false;
  double peak_current = 0.0;
  double peak_early = 0.0;
  double peak_late = 0.0;
  double peak_early_time = 0.0;
  double peak_late_time = 0.0;
  double max_step_conv = 0.0;
  double max_step_flux = 0.0;
  double phi_conv_prev = 0.0;
  double phi_flux_prev = 0.0;
  bool have_phi_prev = false;

  // Recovery detection: earliest time after clearance from which the droop
  // stays inside its bands for a full 0.5 s dwell.
  bool recovered = false;
  double recovery_time = 0.0;
  bool in_band = false;
  double band_entry = 0.0;

  for (long long k = 0; k < n_ctrl && !diverged; ++k) {
    const double t = static_cast<double>(k) * cfg.dt_ctrl;

    Measurements meas;
    meas.v_pcc = pcc_voltage(plant, cfg.plant, cfg.fault, cfg.dt_plant);
    meas.i_f = plant.i_f;
    meas.i_out = pcc_outflow(plant, cfg.plant, cfg.fault, cfg.dt_plant);

    const ThreePhase m =
        controller_step(meas, cfg.control, cfg.dt_ctrl, control);
    const ControlDiagnostics& diag = control.diag;

    if (k % decimation == 0) {
      result.records.push_back(make_record(t, meas, plant.i_line, diag));
    }

    if (has_fault && have_phi_prev && t - cfg.dt_ctrl >= onset &&
        t <= clearance) {
      max_step_conv = std::max(
          max_step_conv, std::abs(diag.phi_conventional.rad - phi_conv_prev));
      max_step_flux =
          std::max(max_step_flux, std::abs(diag.phi_flux.rad - phi_flux_prev));
    }
    phi_conv_prev = diag.phi_conventional.rad;
    phi_flux_prev = diag.phi_flux.rad;
    have_phi_prev = true;

    const ThreePhase v_c = converter_bridge(m, cfg.plant.v_dc);
    for (int i = 0; i < n_sub; ++i) {
      plant = step_plant(plant, v_c, cfg.plant, cfg.fault, cfg.dt_plant);
      const double amp = peak_abs(plant.i_f);
      peak_current = std::max(peak_current, amp);
      if (has_fault && plant.t >= onset) {
        if (plant.t <= onset + 0.010) {
          if (amp > peak_early) {
            peak_early = amp;
            peak_early_time = plant.t;
          }
        } else if (amp > peak_late) {
          peak_late = amp;
          peak_late_time = plant.t;
        }
      }
      if (!within_divergence_guard(plant, cfg.plant)) {
        diverged = true;
        break;
      }
    }

    // The droop state now reflects the step taken at time t; the plant sits
    // at t + dt_ctrl (or at the divergence point).
    const double t_next = plant.t;
    if (!recovered && !diverged && t_next >= clearance) {
      const bool ok =
          std::abs(control.droop.p_filt - p_ref) < 0.02 * std::abs(p_ref) &&
          std::abs(control.droop.omega_c - omega_ref) < 0.5;
      if (ok) {
        if (!in_band) {
          in_band = true;
          band_entry = std::max(t_next, clearance);
        }
        if (t_next - band_entry >= 0.5) {
          recovered = true;
          recovery_time = band_entry - clearance;
        }
      } else {
        in_band = false;
      }
    }
  }

  result.metrics.peak_phase_current = peak_current;
  result.metrics.current_limit_violated =
      peak_current > 1.2 * cfg.control.i_max_sat;
  result.metrics.diverged = diverged;
  if (recovered) result.metrics.recovery_time = recovery_time;
  result.metrics.sync_lost = diverged || !recovered;

  result.extras.max_phi_step_conventional = max_step_conv;
  result.extras.max_phi_step_flux = max_step_flux;
  result.extras.peak_current_fault_early = peak_early;
  result.extras.peak_current_fault_late = peak_late;
  result.extras.peak_early_time = peak_early_time;
  result.extras.peak_late_time = peak_late_time;
  return result;
}

std::vector<StrategyComparison> compare_runs(
    const ScenarioConfig& base,
    const std::vector<SaturationStrategy>& strategies) {
  std::vector<StrategyComparison> rows;
  rows.reserve(strategies.size());
  for (const SaturationStrategy strategy : strategies) {
    ScenarioConfig cfg = base;
    cfg.control.strategy = strategy;
    const RunResult run = run_scenario(cfg);
    rows.push_back({strategy, run.metrics, run.extras});
  }
  return rows;
}

int exit_code_for(const RunMetrics& metrics) {
  if (metrics.diverged) return 3;
  if (metrics.sync_lost) return 2;
  return 0;
}

}  // namespace gfm
