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

#include "gfm/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gfm {

namespace {

struct SwingState {
  double delta;
  double p_filt;
};

struct SwingDeriv {
  double ddelta;
  double dp_filt;
};

SwingDeriv swing_rhs(const SwingState& s, double p_of_delta,
                     const QuasiStaticParams& params) {
  SwingDeriv d;
  const double omega_c =
      params.omega_0 + params.k_p * (params.p_ref - s.p_filt);
  d.ddelta = omega_c - params.omega_g;
  d.dp_filt = params.omega_pp * (p_of_delta - s.p_filt);
  return d;
}

}  // namespace

double p_max_normal(const QuasiStaticParams& params) {
  return 1.5 * params.v_c * params.v_g / params.x_line;
}

double p_max_saturated(const QuasiStaticParams& params) {
  return 1.5 * params.v_g * params.i_max_sat;
}

double p_delta_normal(double delta, const QuasiStaticParams& params) {
  return p_max_normal(params) * std::sin(delta);
}

double p_delta_saturated(double delta, const QuasiStaticParams& params) {
  return p_max_saturated(params) * std::cos(delta);
}

EquilibriumAngles equilibrium_angles(const QuasiStaticParams& params) {
  const double p_max = p_max_normal(params);
  const double p_max_sat = p_max_saturated(params);
  if (params.p_ref > p_max) {
    throw NoEquilibrium("P_ref exceeds the unsaturated power limit");
  }
  if (params.p_ref > p_max_sat) {
    throw NoEquilibrium("P_ref exceeds the current-limited power limit");
  }
  EquilibriumAngles a;
  a.delta_0 = std::asin(params.p_ref / p_max);
  a.delta_max = M_PI - a.delta_0;
  a.delta_max_sat = std::acos(params.p_ref / p_max_sat);
  return a;
}

double fault_frequency(const QuasiStaticParams& params) {
  return params.k_p * params.p_ref + params.omega_0;
}

double implied_current(double delta, const QuasiStaticParams& params) {
  const double re = params.v_c * std::cos(delta) - params.v_g;
  const double im = params.v_c * std::sin(delta);
  return std::hypot(re, im) / params.x_line;
}

double saturation_boundary_angle(const QuasiStaticParams& params) {
  if (implied_current(0.0, params) >= params.i_max_sat) return 0.0;
  if (implied_current(M_PI, params) < params.i_max_sat) return M_PI;
  double lo = 0.0;
  double hi = M_PI;
  // implied_current is monotone in delta on [0, pi].
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (implied_current(mid, params) < params.i_max_sat) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SwingResult swing_simulate(const QuasiStaticParams& params,
                           double fault_duration, bool with_saturation,
                           double dt) {
  const EquilibriumAngles eq = equilibrium_angles(params);
  const double horizon = fault_duration + 3.0;
  const double record_spacing = 1e-4;
  const long stride = std::max(1L, std::lround(record_spacing / dt));

  SwingState s{eq.delta_0, params.p_ref};
  SwingResult result;
  result.clearing_angle = eq.delta_0;
  result.peak_angle = eq.delta_0;

  const auto p_of_delta = [&](double delta, double t, SwingMode* mode) {
    if (t < fault_duration) {
      *mode = with_saturation ? SwingMode::Saturated : SwingMode::Normal;
      return 0.0;
    }
    if (with_saturation &&
        implied_current(delta, params) >= params.i_max_sat) {
      *mode = SwingMode::Saturated;
      return p_delta_saturated(delta, params);
    }
    *mode = SwingMode::Normal;
    return p_delta_normal(delta, params);
  };

  const double converge_delta = 0.5e-3;
  const double converge_p = 0.5e-3 * std::max(std::abs(params.p_ref), 1.0);
  const double runaway = eq.delta_0 + 2.0 * M_PI;

  bool crossed_clearing = fault_duration <= 0.0;
  long step = 0;
  double t = 0.0;
  SwingMode mode = SwingMode::Normal;
  double p_now = p_of_delta(s.delta, t, &mode);
  result.trajectory.push_back({t, s.delta, p_now, mode});

  bool decided = false;
  while (t < horizon) {
    // RK4 on the two-state swing; P(delta) is re-evaluated per stage.
    SwingMode stage_mode;
    const SwingDeriv k1 =
        swing_rhs(s, p_of_delta(s.delta, t, &stage_mode), params);
    SwingState s2{s.delta + 0.5 * dt * k1.ddelta,
                  s.p_filt + 0.5 * dt * k1.dp_filt};
    const SwingDeriv k2 =
        swing_rhs(s2, p_of_delta(s2.delta, t + 0.5 * dt, &stage_mode), params);
    SwingState s3{s.delta + 0.5 * dt * k2.ddelta,
                  s.p_filt + 0.5 * dt * k2.dp_filt};
    const SwingDeriv k3 =
        swing_rhs(s3, p_of_delta(s3.delta, t + 0.5 * dt, &stage_mode), params);
    SwingState s4{s.delta + dt * k3.ddelta, s.p_filt + dt * k3.dp_filt};
    const SwingDeriv k4 =
        swing_rhs(s4, p_of_delta(s4.delta, t + dt, &stage_mode), params);

    s.delta += dt / 6.0 *
               (k1.ddelta + 2.0 * k2.ddelta + 2.0 * k3.ddelta + k4.ddelta);
    s.p_filt += dt / 6.0 *
                (k1.dp_filt + 2.0 * k2.dp_filt + 2.0 * k3.dp_filt + k4.dp_filt);
    t = ++step * dt;

    if (!crossed_clearing && t >= fault_duration) {
      result.clearing_angle = s.delta;
      crossed_clearing = true;
    }
    result.peak_angle = std::max(result.peak_angle, s.delta);

    p_now = p_of_delta(s.delta, t, &mode);
    if (step % stride == 0) {
      result.trajectory.push_back({t, s.delta, p_now, mode});
    }

    if (t >= fault_duration) {
      if (s.delta > runaway) {
        result.stable = false;
        decided = true;
        break;
      }
      if (std::abs(s.delta - eq.delta_0) < converge_delta &&
          std::abs(s.p_filt - params.p_ref) < converge_p &&
          std::abs(p_now - params.p_ref) < converge_p) {
        result.stable = true;
        decided = true;
        break;
      }
    }
  }
  if (!decided) {
    result.stable = std::abs(s.delta - eq.delta_0) < 1e-3 &&
                    std::abs(p_now - params.p_ref) <
                        1e-3 * std::max(std::abs(params.p_ref), 1.0);
  }
  if (result.trajectory.back().t != t) {
    result.trajectory.push_back({t, s.delta, p_now, mode});
  }
  return result;
}

CriticalClearing critical_clearing_time(const QuasiStaticParams& params,
                                        bool with_saturation, double dt,
                                        double t_max, double resolution) {
  CriticalClearing out;
  const SwingResult at_max = swing_simulate(params, t_max, with_saturation, dt);
  if (at_max.stable) {
    out.t_cc = std::numeric_limits<double>::infinity();
    out.clearing_angle = at_max.clearing_angle;
    out.peak_angle = at_max.peak_angle;
    return out;
  }

  double lo = 0.0;  // longest duration known stable
  double hi = t_max;
  SwingResult marginal = swing_simulate(params, 0.0, with_saturation, dt);
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    const SwingResult r = swing_simulate(params, mid, with_saturation, dt);
    if (r.stable) {
      lo = mid;
      marginal = r;
    } else {
      hi = mid;
    }
  }
  out.t_cc = lo;
  out.clearing_angle = marginal.clearing_angle;
  out.peak_angle = marginal.peak_angle;
  return out;
}

}  // namespace gfm
