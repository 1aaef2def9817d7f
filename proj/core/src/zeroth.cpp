#include "lqrpg/zeroth.hpp"

#include <cmath>

namespace lqrpg {

Matrix sample_sphere(Eigen::Index nu, Eigen::Index nx, double v,
                     RngStream& rng) {
  if (!(v > 0.0)) throw DimensionError("sample_sphere: radius must be > 0");
  Matrix u(nu, nx);
  double norm_sq = 0.0;
  do {
    for (Eigen::Index i = 0; i < nu; ++i)
      for (Eigen::Index j = 0; j < nx; ++j) u(i, j) = rng.gaussian();
    norm_sq = u.squaredNorm();
  } while (norm_sq == 0.0);
  u *= v / std::sqrt(norm_sq);
  return u;
}

Matrix sample_ball(Eigen::Index nu, Eigen::Index nx, double v, RngStream& rng) {
  Matrix u = sample_sphere(nu, nx, v, rng);
  const double d = static_cast<double>(nu * nx);
  u *= std::pow(rng.uniform01(), 1.0 / d);
  return u;
}

namespace {

struct SampleCost {
  double cost = 0.0;
  bool diverged = false;
  bool include = true;
};

// Averages (nx nu / v^2) Chat_{K+U_k} U_k over n fresh sphere perturbations.
// Division is by n regardless of excluded samples; a fully diverged batch is
// an estimation failure.
template <typename CostFn>
OracleSample estimate_core(const LinearSystem& sys, const Gain& k,
                           const ZeroOrderParams& params, RngStream& rng,
                           CostFn&& cost_of) {
  if (!(params.v > 0.0) || params.ell < 1 || params.n < 1)
    throw DimensionError("direct estimate: invalid parameters");
  const Eigen::Index nu = sys.nu();
  const Eigen::Index nx = sys.nx();
  const double scale =
      static_cast<double>(nx) * static_cast<double>(nu) / (params.v * params.v);

  OracleSample s;
  s.method = OracleMethod::direct;
  s.gradient = Matrix::Zero(nu, nx);
  s.v = params.v;
  s.ell = params.ell;
  s.n = params.n;
  std::int64_t diverged = 0;
  for (std::int64_t kk = 0; kk < params.n; ++kk) {
    RngStream sub = rng.fork();
    Matrix u = sample_sphere(nu, nx, params.v, sub);
    Matrix gain = k.K + u;
    SampleCost sc = cost_of(gain, sub);
    if (sc.diverged) ++diverged;
    if (sc.include) s.gradient.noalias() += (scale * sc.cost) * u;
  }
  if (diverged == params.n)
    throw EstimationFailureError("direct estimate: every rollout diverged");
  s.gradient /= static_cast<double>(params.n);
  s.destabilized_rollouts = diverged;
  s.samples_consumed = params.n * params.ell;
  return s;
}

}  // namespace

OracleSample direct_gradient_estimate(const LinearSystem& sys,
                                      const LqrCost& lc, const Gain& k,
                                      const ZeroOrderParams& params,
                                      RngStream& rng) {
  const CovarianceSampler init(sys.sigma_0);
  const CovarianceSampler noise(sys.sigma_w);
  const Matrix& q = lc.Q.mat();
  const Matrix& r = lc.R.mat();
  Matrix qk(sys.nx(), sys.nx());
  auto cost_of = [&](const Matrix& gain, RngStream& sub) {
    qk.noalias() = gain.transpose() * r * gain;
    qk += q;
    auto rc = detail::rollout_cost(sys, gain, qk,
                                   static_cast<std::size_t>(params.ell), init,
                                   noise, sub);
    // Overflow truncates the trajectory; the truncated average is finite and
    // still enters the estimate.
    return SampleCost{rc.cost, rc.diverged, true};
  };
  return estimate_core(sys, k, params, rng, cost_of);
}

OracleSample direct_gradient_estimate_exact_cost(const LinearSystem& sys,
                                                 const LqrCost& lc,
                                                 const Gain& k,
                                                 const ZeroOrderParams& params,
                                                 RngStream& rng) {
  auto cost_of = [&](const Matrix& gain, RngStream&) {
    Gain g{gain};
    // No finite analytic cost exists for a destabilizing perturbation; the
    // sample is dropped (analysis hook only).
    if (!is_stabilizing(sys, g)) return SampleCost{0.0, true, false};
    return SampleCost{cost(sys, lc, g), false, true};
  };
  return estimate_core(sys, k, params, rng, cost_of);
}

double direct_bias_bound(const LevelConstants& consts, const LinearSystem& sys,
                         const LqrCost& lc, const Gain& k, double v,
                         std::int64_t ell) {
  AnalysisContext ctx(sys, lc, consts);
  const double z = cost(sys, lc, k);
  if (!(v > 0.0) || v > std::min(ctx.lipschitz_radius(z), ctx.norm_K_star()))
    throw OutOfRegimeError("direct_bias_bound: radius out of regime");
  const double d = static_cast<double>(sys.nx() * sys.nu());
  const double smoothed_level = z + v * ctx.cost_lipschitz(z);
  return d * ctx.transient_constant(smoothed_level) /
             (v * static_cast<double>(ell)) +
         v * ctx.grad_lipschitz(z);
}

double direct_second_moment_bound(const LevelConstants& consts,
                                  const LinearSystem& sys, const LqrCost& lc,
                                  const Gain& k, double v, std::int64_t ell,
                                  std::int64_t n) {
  AnalysisContext ctx(sys, lc, consts);
  const double z = cost(sys, lc, k);
  const double bias = direct_bias_bound(consts, sys, lc, k, v, ell);
  const double bg = ctx.grad_norm_bound(z);
  const double phi = bg * bg + bias * bias + bg * bias;
  const double d = static_cast<double>(sys.nx() * sys.nu());
  const double smoothed_level = z + v * ctx.cost_lipschitz(z);
  const double eps_ell =
      ctx.transient_constant(smoothed_level) / static_cast<double>(ell);
  const double bracket = z + eps_ell + v * ctx.cost_lipschitz(z);
  return phi +
         d * d * bracket * bracket / (static_cast<double>(n) * v * v);
}

}  // namespace lqrpg
