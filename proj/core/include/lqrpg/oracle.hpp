#pragma once

#include "lqrpg/types.hpp"

#include <cstdint>
#include <limits>

namespace lqrpg {

enum class OracleMethod { indirect, direct };

/// A stochastic gradient estimate plus metadata about how it was produced.
struct OracleSample {
  Matrix gradient;
  OracleMethod method = OracleMethod::indirect;
  std::int64_t samples_consumed = 0;

  // Direct method only.
  double v = std::numeric_limits<double>::quiet_NaN();
  std::int64_t ell = 0;
  std::int64_t n = 0;
  std::int64_t destabilized_rollouts = 0;

  // Indirect method, experiments only (true system available).
  double delta_theta_norm = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace lqrpg
