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

#ifndef GFM_SIGNAL_HPP_
#define GFM_SIGNAL_HPP_

#include <cmath>
#include <complex>

// Reference-frame transforms shared by the converter model, the controller and
// the flux estimator. Amplitude-invariant scaling throughout: a balanced set of
// cosines with peak A maps to |alpha + j*beta| = A, and to a dq vector of
// magnitude A once the rotating-frame angle tracks the source angle.

namespace gfm {

struct ThreePhase {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

struct AlphaBeta {
  double alpha = 0.0;
  double beta = 0.0;
  double zero = 0.0;
};

struct DqPair {
  double d = 0.0;
  double q = 0.0;
  double zero = 0.0;
};

// Angle in radians, kept unwrapped so consecutive samples can be differenced
// without 2*pi jumps. normalized() folds into (-pi, pi] for display.
struct Angle {
  double rad = 0.0;

  double normalized() const {
    double a = std::remainder(rad, 2.0 * M_PI);
    if (a <= -M_PI) a += 2.0 * M_PI;
    return a;
  }
};

inline AlphaBeta clarke(const ThreePhase& x) {
  AlphaBeta y;
  y.alpha = (2.0 / 3.0) * (x.a - 0.5 * x.b - 0.5 * x.c);
  y.beta = (x.b - x.c) / std::sqrt(3.0);
  y.zero = (x.a + x.b + x.c) / 3.0;
  return y;
}

inline ThreePhase inverse_clarke(const AlphaBeta& y) {
  const double s = std::sqrt(3.0) / 2.0;
  ThreePhase x;
  x.a = y.alpha + y.zero;
  x.b = -0.5 * y.alpha + s * y.beta + y.zero;
  x.c = -0.5 * y.alpha - s * y.beta + y.zero;
  return x;
}

inline DqPair park(const AlphaBeta& y, const Angle& theta) {
  const double c = std::cos(theta.rad);
  const double s = std::sin(theta.rad);
  DqPair z;
  z.d = y.alpha * c + y.beta * s;
  z.q = -y.alpha * s + y.beta * c;
  z.zero = y.zero;
  return z;
}

inline AlphaBeta inverse_park(const DqPair& z, const Angle& theta) {
  const double c = std::cos(theta.rad);
  const double s = std::sin(theta.rad);
  AlphaBeta y;
  y.alpha = z.d * c - z.q * s;
  y.beta = z.d * s + z.q * c;
  y.zero = z.zero;
  return y;
}

// Samples a balanced three-phase set at t = 0 from its phase-a phasor
// (peak-amplitude convention, phases spaced -2*pi/3 apart in a, b, c order).
inline ThreePhase balanced_snapshot(const std::complex<double>& phasor) {
  constexpr double kTwoThirdsPi = 2.0 * M_PI / 3.0;
  ThreePhase x;
  x.a = phasor.real();
  x.b = (phasor * std::polar(1.0, -kTwoThirdsPi)).real();
  x.c = (phasor * std::polar(1.0, kTwoThirdsPi)).real();
  return x;
}

struct MagnitudePhase {
  double magnitude = 0.0;
  Angle phase;
};

// atan2-based polar form; (0, 0) maps to phase 0 by the atan2(0, 0) = 0
// convention so degenerate vectors never produce NaN.
inline MagnitudePhase magnitude_phase(const DqPair& z) {
  MagnitudePhase mp;
  mp.magnitude = std::hypot(z.d, z.q);
  mp.phase.rad = (z.d == 0.0 && z.q == 0.0) ? 0.0 : std::atan2(z.q, z.d);
  return mp;
}

}  // namespace gfm

#endif  // GFM_SIGNAL_HPP_
