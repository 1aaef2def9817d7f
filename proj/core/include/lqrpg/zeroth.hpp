#pragma once

#include "lqrpg/lqr.hpp"
#include "lqrpg/oracle.hpp"
#include "lqrpg/sim.hpp"

namespace lqrpg {

struct ZeroOrderParams {
  double v = 0.0;        ///< exploration radius (Frobenius)
  std::int64_t ell = 1;  ///< rollout length
  std::int64_t n = 1;    ///< number of rollouts
};

/// Uniform draw on the Frobenius sphere of radius v (Gaussian fill then
/// renormalize); the norm is exact to roundoff.
Matrix sample_sphere(Eigen::Index nu, Eigen::Index nx, double v,
                     RngStream& rng);

/// Uniform draw in the closed Frobenius ball of radius v.
Matrix sample_ball(Eigen::Index nu, Eigen::Index nx, double v, RngStream& rng);

/// Zeroth-order estimate: average of (nx nu / v^2) Chat_{K+U_k} U_k over n
/// sphere perturbations, each Chat from a fresh ell-step rollout. Perturbed
/// rollouts that destabilize are still averaged; only numeric overflow
/// truncates, and if every rollout overflows an EstimationFailureError is
/// thrown.
OracleSample direct_gradient_estimate(const LinearSystem& sys,
                                      const LqrCost& lc, const Gain& k,
                                      const ZeroOrderParams& params,
                                      RngStream& rng);

/// Same estimator with the rollout cost replaced by the analytic cost
/// C(K + U_k); test and analysis hook for the smoothing identity.
OracleSample direct_gradient_estimate_exact_cost(const LinearSystem& sys,
                                                 const LqrCost& lc,
                                                 const Gain& k,
                                                 const ZeroOrderParams& params,
                                                 RngStream& rng);

/// Bias bound nx nu eps'(C(K) + v h_C(C(K))) / (v ell) + v h_grad(C(K)).
/// Requires v <= min{h(C(K)), ||K*||}; throws OutOfRegimeError otherwise.
double direct_bias_bound(const LevelConstants& consts, const LinearSystem& sys,
                         const LqrCost& lc, const Gain& k, double v,
                         std::int64_t ell);

/// Second-moment bound phi + (nx^2 nu^2 / (n v^2)) [C + eps(ell, C + v h_C)
/// + v h_C]^2 with phi = b_grad^2 + bias^2 + b_grad * bias.
double direct_second_moment_bound(const LevelConstants& consts,
                                  const LinearSystem& sys, const LqrCost& lc,
                                  const Gain& k, double v, std::int64_t ell,
                                  std::int64_t n);

}  // namespace lqrpg
