#include "lqrpg/sgd.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace lqrpg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int resolve_threads(const RunOptions& opts, int runs) {
  int t = opts.threads;
  if (t <= 0) {
    if (const char* env = std::getenv("LQRPG_THREADS")) t = std::atoi(env);
  }
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  if (t <= 0) t = 1;
  return std::min(t, std::max(1, runs));
}

// Fan the runs out over a worker pool; results keyed by run index so the
// output is independent of scheduling.
template <typename Fn>
void parallel_runs(int runs, int threads, Fn&& body) {
  if (threads <= 1) {
    for (int r = 0; r < runs; ++r) body(r);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= runs) return;
      try {
        body(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct LevelFrame {
  LevelConstants consts;
  double j0 = 0;
  double c_star = 0;
  double radius = 0;  // r(J0)
};

LevelFrame make_frame(const LinearSystem& sys, const LqrCost& lc,
                      const Gain& k0, const RunOptions& opts) {
  const double c0 = cost(sys, lc, k0);
  LevelFrame f;
  f.j0 = opts.j0 ? *opts.j0 : opts.j0_multiplier * c0;
  f.consts = level_constants(sys, lc, f.j0);
  f.c_star = f.consts.C_star;
  f.radius = f.consts.r;
  return f;
}

bool should_record(std::int64_t i, std::int64_t iters, std::int64_t stride) {
  return i == 1 || i == iters || (stride > 0 && i % stride == 0);
}

RunRecord destabilized_record(std::int64_t i, std::int64_t samples) {
  RunRecord rec;
  rec.iteration = i;
  rec.cost = kInf;
  rec.gap = kInf;
  rec.grad_est_norm = kNaN;
  rec.in_level_set = false;
  rec.step_radius_ok = false;
  rec.destabilized = true;
  rec.samples_consumed = samples;
  return rec;
}

}  // namespace

double step_size(const StepSchedule& schedule, std::int64_t i) {
  if (i < 1) throw DimensionError("step_size: iteration index must be >= 1");
  if (schedule.form == StepSchedule::Form::constant) return schedule.eta0;
  const double floor_arg =
      std::pow(static_cast<double>(i), schedule.kappa) / schedule.divisor;
  return schedule.eta0 / std::ceil(floor_arg);
}

ZeroOrderParams DirectParamSchedule::at(std::int64_t i) const {
  const double sqrt_i = std::sqrt(static_cast<double>(i));
  const double vblock = std::ceil(sqrt_i / v_divisor);
  const double gblock = std::ceil(static_cast<double>(i) / block);
  ZeroOrderParams p;
  p.v = v0 / vblock;
  p.ell = ell0 * static_cast<std::int64_t>(gblock);
  p.n = n0 * static_cast<std::int64_t>(gblock);
  return p;
}

double BiasSpec::at(std::int64_t i) const {
  if (beta == 0.0) return b0;
  return b0 * std::pow(static_cast<double>(i) + offset, -beta);
}

Gain pg_update(const Gain& k, const Matrix& g_hat, double eta) {
  if (g_hat.rows() != k.K.rows() || g_hat.cols() != k.K.cols())
    throw DimensionError("pg_update: gradient dimension mismatch");
  if (!(eta >= 0.0)) throw DimensionError("pg_update: step size must be >= 0");
  return Gain{k.K - eta * g_hat};
}

ScheduleReport validate_schedule(const LevelConstants& consts,
                                 const StepSchedule& schedule,
                                 const BiasSpec& bias, const Deltas& deltas,
                                 std::int64_t horizon, double cost_at_init,
                                 std::optional<double> second_moment) {
  if (schedule.form == StepSchedule::Form::power_floor &&
      !(schedule.kappa > 0.5 && schedule.kappa < 1.0))
    throw OutOfRegimeError("validate_schedule: kappa must lie in (1/2, 1)");
  if (horizon < 1)
    throw DimensionError("validate_schedule: horizon must be >= 1");

  const double c = second_moment
                       ? *second_moment
                       : indirect_second_moment_bound(consts, consts.p_level);
  const double nu = consts.n_u > 0 ? static_cast<double>(consts.n_u) : 1.0;
  const double b = consts.b_grad;
  const double bias_sup = bias.at(1);
  const double alpha1 = nu * c * b * b + 3.0 * std::pow(b, 4) +
                        2.0 * nu * std::pow(b, 3) * bias_sup;

  ScheduleReport rep;
  const double eps_prime = consts.J0 - cost_at_init;
  if (!(eps_prime > 0.0))
    throw InvalidLevelError("validate_schedule: J0 must exceed C(K0)");
  const double root = (std::sqrt(1.0 + 4.0 * eps_prime * eps_prime) - 1.0) / 2.0;
  rep.epsilon = root * root;

  double sum_sq = 0.0, sum_bias = 0.0, sup_eta = 0.0;
  for (std::int64_t i = 1; i <= horizon; ++i) {
    const double eta = step_size(schedule, i);
    sup_eta = std::max(sup_eta, eta);
    sum_sq += eta * eta;
    sum_bias += eta * bias.at(i);
  }
  // Integral tail bounds past the horizon; eta_i <= eta0 * divisor / i^kappa
  // for the power-floor form, constant otherwise.
  const double h = static_cast<double>(horizon);
  if (schedule.form == StepSchedule::Form::power_floor) {
    const double env = schedule.eta0 * schedule.divisor;
    sum_sq += env * env * std::pow(h, 1.0 - 2.0 * schedule.kappa) /
              (2.0 * schedule.kappa - 1.0);
    const double decay = schedule.kappa + bias.beta;
    if (bias.b0 == 0.0)
      ;  // no bias tail
    else if (decay > 1.0)
      sum_bias += env * bias.b0 * std::pow(h, 1.0 - decay) / (decay - 1.0);
    else
      sum_bias = kInf;
  } else {
    if (schedule.eta0 > 0.0) sum_sq = kInf;
    if (bias.b0 == 0.0)
      ;
    else if (bias.beta > 1.0)
      sum_bias += schedule.eta0 * bias.b0 * std::pow(h, 1.0 - bias.beta) /
                  (bias.beta - 1.0);
    else if (schedule.eta0 > 0.0)
      sum_bias = kInf;
  }

  rep.sum_eta_sq = sum_sq;
  rep.sum_eta_bias = sum_bias;
  rep.sup_eta = sup_eta;
  rep.threshold_eta_sq_1 = deltas.delta1 * rep.epsilon / (alpha1 + c);
  rep.threshold_eta_sq_2 = consts.r * consts.r * deltas.delta3 / c;
  rep.threshold_bias =
      std::sqrt(deltas.delta2 * rep.epsilon / consts.alpha2);
  rep.cond_eta_below_mu = sup_eta < consts.mu;
  rep.cond_sum_sq_1 = sum_sq <= rep.threshold_eta_sq_1;
  rep.cond_sum_sq_2 = sum_sq <= rep.threshold_eta_sq_2;
  rep.cond_bias = sum_bias <= rep.threshold_bias;
  rep.passes = rep.cond_eta_below_mu && rep.cond_sum_sq_1 &&
               rep.cond_sum_sq_2 && rep.cond_bias;

  double scale = consts.mu / std::max(sup_eta, 1e-300);
  scale = std::min(scale, std::sqrt(rep.threshold_eta_sq_1 /
                                    std::max(sum_sq, 1e-300)));
  scale = std::min(scale, std::sqrt(rep.threshold_eta_sq_2 /
                                    std::max(sum_sq, 1e-300)));
  if (sum_bias > 0.0)
    scale = std::min(scale, rep.threshold_bias / sum_bias);
  rep.eta0_max_scale = std::isfinite(scale) ? scale : 0.0;
  return rep;
}

RunMatrix run_synthetic_biased(const LinearSystem& sys, const LqrCost& lc,
                               const Gain& k0, const StepSchedule& schedule,
                               const SyntheticBiasSpec& bias, int runs,
                               std::int64_t iters, std::uint64_t master_seed,
                               const RunOptions& opts) {
  if (!is_stabilizing(sys, k0))
    throw InstabilityError("run_synthetic_biased: K0 not stabilizing");
  const LevelFrame frame = make_frame(sys, lc, k0, opts);
  const double entry_std = std::sqrt(bias.entry_variance);
  RunMatrix out(static_cast<std::size_t>(runs));

  parallel_runs(runs, resolve_threads(opts, runs), [&](int run) {
    RngStream rng(master_seed, static_cast<std::uint64_t>(run));
    auto& records = out[static_cast<std::size_t>(run)];

    // Per-run bias mean direction, unit Frobenius norm.
    Matrix dir(sys.nu(), sys.nx());
    do {
      for (Eigen::Index i = 0; i < dir.size(); ++i)
        dir.data()[i] = rng.gaussian();
    } while (dir.squaredNorm() == 0.0);
    dir /= dir.norm();

    Gain k = k0;
    Matrix noise(sys.nu(), sys.nx());
    for (std::int64_t i = 1; i <= iters; ++i) {
      detail::LqrData data;
      try {
        data = detail::lqr_data(sys, lc, k);
      } catch (const InstabilityError&) {
        records.push_back(destabilized_record(i, i));
        return;
      }
      const double mean_norm =
          bias.mean_decay_beta == 0.0
              ? bias.mean_norm0
              : bias.mean_norm0 * std::pow(static_cast<double>(i),
                                           -bias.mean_decay_beta);
      for (Eigen::Index j = 0; j < noise.size(); ++j)
        noise.data()[j] = entry_std * rng.gaussian();
      Matrix g_hat = data.gradient + mean_norm * dir + noise;
      const double eta = step_size(schedule, i);

      if (should_record(i, iters, opts.record_stride)) {
        RunRecord rec;
        rec.iteration = i;
        rec.cost = data.cost;
        rec.gap = data.cost - frame.c_star;
        rec.grad_est_norm = g_hat.norm();
        rec.in_level_set = data.cost <= frame.j0;
        rec.step_radius_ok = eta * g_hat.norm() <= frame.radius;
        rec.destabilized = false;
        rec.samples_consumed = i;
        records.push_back(rec);
      }
      k = Gain{k.K - eta * g_hat};
    }
  });
  return out;
}

RunMatrix run_indirect_pg(const LinearSystem& sys, const LqrCost& lc,
                          const Gain& k0, const StepSchedule& schedule,
                          const IndirectRunConfig& cfg, int runs,
                          std::int64_t iters, std::uint64_t master_seed,
                          const RunOptions& opts) {
  if (!is_stabilizing(sys, k0))
    throw InstabilityError("run_indirect_pg: K0 not stabilizing");
  if (cfg.t0 < sys.nx() + sys.nu())
    throw InsufficientExcitationError("run_indirect_pg: t0 too small");
  const LevelFrame frame = make_frame(sys, lc, k0, opts);
  const Eigen::Index nx = sys.nx();
  const Eigen::Index nu = sys.nu();
  RunMatrix out(static_cast<std::size_t>(runs));

  parallel_runs(runs, resolve_threads(opts, runs), [&](int run) {
    RngStream rng(master_seed, static_cast<std::uint64_t>(run));
    auto& records = out[static_cast<std::size_t>(run)];
    const CovarianceSampler init(sys.sigma_0);
    const CovarianceSampler noise(sys.sigma_w);
    const CovarianceSampler dither(sys.sigma_e);

    Vector x = init.sample(rng), w(nx), e(nu), xn(nx);
    std::vector<Vector> regs, nexts;
    regs.reserve(static_cast<std::size_t>(cfg.t0));
    nexts.reserve(static_cast<std::size_t>(cfg.t0));
    Vector d(nx + nu);
    for (std::int64_t t = 0; t < cfg.t0; ++t) {
      Vector u = k0.K * x;
      dither.sample(rng, e);
      u += e;
      noise.sample(rng, w);
      xn.noalias() = sys.A * x;
      xn.noalias() += sys.B * u;
      xn += w;
      d << x, u;
      regs.push_back(d);
      nexts.push_back(xn);
      x = xn;
    }
    RlsState rls = RlsState::batch_init(regs, nexts);

    Gain k = k0;
    for (std::int64_t i = 1; i <= iters; ++i) {
      // True-loop divergence ends the run; later data are discarded.
      if (!is_stabilizing(sys, k) || !x.allFinite() ||
          x.cwiseAbs().maxCoeff() > kDivergenceThreshold) {
        records.push_back(destabilized_record(i, cfg.t0 + i));
        return;
      }
      const Matrix& k_exc = cfg.off_policy ? k0.K : k.K;
      Vector u = k_exc * x;
      dither.sample(rng, e);
      u += e;
      noise.sample(rng, w);
      xn.noalias() = sys.A * x;
      xn.noalias() += sys.B * u;
      xn += w;
      d << x, u;
      rls.update(d, xn);
      x = xn;

      bool model_ok = true;
      Matrix g_hat;
      try {
        g_hat = model_gradient(rls.a_hat(nx), rls.b_hat(nx), lc, sys.sigma_w, k);
      } catch (const ModelInstabilityError&) {
        model_ok = false;  // skip the step, keep ingesting data
      }
      const double eta = step_size(schedule, i);

      if (should_record(i, iters, opts.record_stride)) {
        RunRecord rec;
        rec.iteration = i;
        rec.cost = cost(sys, lc, k);
        rec.gap = rec.cost - frame.c_star;
        rec.grad_est_norm = model_ok ? g_hat.norm() : kNaN;
        rec.in_level_set = rec.cost <= frame.j0;
        rec.step_radius_ok =
            !model_ok || eta * g_hat.norm() <= frame.radius;
        rec.destabilized = false;
        rec.samples_consumed = cfg.t0 + i;
        records.push_back(rec);
      }
      if (model_ok) k = Gain{k.K - eta * g_hat};
    }
  });
  return out;
}

RunMatrix run_direct_pg(const LinearSystem& sys, const LqrCost& lc,
                        const Gain& k0, const StepSchedule& schedule,
                        const DirectRunParams& params, int runs,
                        std::int64_t iters, std::uint64_t master_seed,
                        const RunOptions& opts) {
  if (!is_stabilizing(sys, k0))
    throw InstabilityError("run_direct_pg: K0 not stabilizing");
  const LevelFrame frame = make_frame(sys, lc, k0, opts);
  RunMatrix out(static_cast<std::size_t>(runs));

  parallel_runs(runs, resolve_threads(opts, runs), [&](int run) {
    RngStream rng(master_seed, static_cast<std::uint64_t>(run));
    auto& records = out[static_cast<std::size_t>(run)];
    Gain k = k0;
    std::int64_t samples = 0;
    for (std::int64_t i = 1; i <= iters; ++i) {
      if (!is_stabilizing(sys, k)) {
        records.push_back(destabilized_record(i, samples));
        return;
      }
      const ZeroOrderParams zp =
          params.adaptive ? params.schedule.at(i) : params.fixed;
      bool estimate_ok = true;
      OracleSample sample;
      try {
        sample = direct_gradient_estimate(sys, lc, k, zp, rng);
      } catch (const EstimationFailureError&) {
        estimate_ok = false;  // keep the gain, record the event
      }
      samples += zp.n * zp.ell;
      const double eta = step_size(schedule, i);

      if (should_record(i, iters, opts.record_stride)) {
        RunRecord rec;
        rec.iteration = i;
        rec.cost = cost(sys, lc, k);
        rec.gap = rec.cost - frame.c_star;
        rec.grad_est_norm = estimate_ok ? sample.gradient.norm() : kNaN;
        rec.in_level_set = rec.cost <= frame.j0;
        rec.step_radius_ok =
            !estimate_ok || eta * sample.gradient.norm() <= frame.radius;
        rec.destabilized = false;
        rec.samples_consumed = samples;
        records.push_back(rec);
      }
      if (estimate_ok) k = Gain{k.K - eta * sample.gradient};
    }
  });
  return out;
}

}  // namespace lqrpg
