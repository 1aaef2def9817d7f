#pragma once

#include "lqrpg/lqr.hpp"
#include "lqrpg/rng.hpp"

#include <optional>
#include <vector>

namespace lqrpg {

/// Any state entry beyond this magnitude truncates the trajectory and sets
/// the divergence flag; later data are discarded.
inline constexpr double kDivergenceThreshold = 1e150;

struct Trajectory {
  std::vector<Vector> states;  ///< x_0 .. x_T (final state retained)
  std::vector<Vector> inputs;  ///< u_0 .. u_{T-1}
  bool diverged = false;

  std::size_t length() const { return inputs.size(); }
};

/// Closed-loop rollout: x0 ~ N(0, sigma_0), u_t = K x_t (+ e_t when dither
/// is given), x_{t+1} = A x_t + B u_t + w_t. Unstable gains are allowed;
/// divergence is data.
Trajectory rollout_closed_loop(const LinearSystem& sys, const Gain& k,
                               std::size_t length,
                               const std::optional<SymmetricPsd>& dither,
                               RngStream& rng);

/// Empirical average cost (1/l) sum_{t<l} x_t' (Q + K'RK) x_t over the first
/// l = traj.length() states. No burn-in.
double empirical_cost(const Trajectory& traj, const LqrCost& lc,
                      const Gain& k);

namespace detail {

// Fused rollout + cost accumulation, arithmetic identical to
// rollout_closed_loop followed by empirical_cost but without storing the
// trajectory. Samplers must be prebuilt from sigma_0 / sigma_w.
struct RolloutCost {
  double cost = 0;
  bool diverged = false;
};
RolloutCost rollout_cost(const LinearSystem& sys, const Matrix& gain,
                         const Matrix& q_k, std::size_t length,
                         const CovarianceSampler& init_sampler,
                         const CovarianceSampler& noise_sampler,
                         RngStream& rng);

}  // namespace detail

}  // namespace lqrpg
