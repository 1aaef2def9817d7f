#pragma once

#include "lqrpg/lqr.hpp"

namespace lqrpg {

struct Preset {
  LinearSystem sys;
  LqrCost cost;
  Gain k0;  ///< gain the experiments start from / evaluate at
};

/// (a, b, q, r, sigma_w^2) = (0.5, 1, 1, 1, 1), sigma_0 = sigma_e = 1,
/// k0 = 0. Closed-form checks live here.
Preset preset_scalar();

/// 3x3 tridiagonal benchmark, B = I, Q = 0.001 I, R = I, sigma_0 = 0.1 I,
/// dither I; k0 fixed at the optimum of (A, B, 50Q, R). Process noise
/// defaults to 1e-4 I and is configurable.
Preset preset_benchmark3(double sigma_w_scale = 1e-4);

/// Boeing 747 longitudinal dynamics (5 states, 4 inputs), Q = R = I,
/// sigma_0 = 1e-6 I, sigma_w = 1e-3 I, dither I; k0 at the optimum of
/// (A, B, 40Q, R).
Preset preset_boeing747();

}  // namespace lqrpg
