#include "lqrpg/sim.hpp"

#include <cmath>

namespace lqrpg {

namespace {

bool within_bounds(const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]);
    if (!(a <= kDivergenceThreshold)) return false;  // catches NaN too
  }
  return true;
}

}  // namespace

Trajectory rollout_closed_loop(const LinearSystem& sys, const Gain& k,
                               std::size_t length,
                               const std::optional<SymmetricPsd>& dither,
                               RngStream& rng) {
  require(length >= 1, "rollout_closed_loop: length must be >= 1");
  require(k.K.rows() == sys.nu() && k.K.cols() == sys.nx(),
          "rollout_closed_loop: gain dimension mismatch");
  CovarianceSampler init(sys.sigma_0);
  CovarianceSampler noise(sys.sigma_w);
  std::optional<CovarianceSampler> dither_sampler;
  if (dither) dither_sampler.emplace(*dither);

  Trajectory traj;
  traj.states.reserve(length + 1);
  traj.inputs.reserve(length);
  Vector x = init.sample(rng);
  Vector w(sys.nx()), e;
  traj.states.push_back(x);
  for (std::size_t t = 0; t < length; ++t) {
    Vector u = k.K * x;
    if (dither_sampler) {
      dither_sampler->sample(rng, e);
      u += e;
    }
    noise.sample(rng, w);
    Vector xn = sys.A * x + sys.B * u + w;
    if (!within_bounds(xn)) {
      traj.inputs.push_back(std::move(u));
      traj.diverged = true;
      return traj;
    }
    traj.inputs.push_back(std::move(u));
    traj.states.push_back(xn);
    x = std::move(xn);
  }
  return traj;
}

double empirical_cost(const Trajectory& traj, const LqrCost& lc,
                      const Gain& k) {
  const std::size_t ell = traj.length();
  if (ell == 0) throw DimensionError("empirical_cost: empty trajectory");
  const Matrix qk = lc.Q.mat() + k.K.transpose() * lc.R.mat() * k.K;
  double acc = 0.0;
  for (std::size_t t = 0; t < ell; ++t)
    acc += traj.states[t].dot(qk * traj.states[t]);
  return acc / static_cast<double>(ell);
}

namespace detail {

RolloutCost rollout_cost(const LinearSystem& sys, const Matrix& gain,
                         const Matrix& q_k, std::size_t length,
                         const CovarianceSampler& init_sampler,
                         const CovarianceSampler& noise_sampler,
                         RngStream& rng) {
  const Eigen::Index nx = sys.nx();
  Vector x(nx), xn(nx), u(sys.nu()), w(nx);
  init_sampler.sample(rng, x);
  RolloutCost out;
  double acc = 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    acc += x.dot(q_k * x);
    u.noalias() = gain * x;
    noise_sampler.sample(rng, w);
    xn.noalias() = sys.A * x;
    xn.noalias() += sys.B * u;
    xn += w;
    if (!within_bounds(xn)) {
      out.diverged = true;
      // Same average as empirical_cost over the truncated trajectory.
      out.cost = acc / static_cast<double>(t + 1);
      return out;
    }
    x.swap(xn);
  }
  out.cost = acc / static_cast<double>(length);
  return out;
}

}  // namespace detail

}  // namespace lqrpg
