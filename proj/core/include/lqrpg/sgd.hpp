#pragma once

#include "lqrpg/ident.hpp"
#include "lqrpg/lqr.hpp"
#include "lqrpg/zeroth.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace lqrpg {

struct StepSchedule {
  enum class Form { constant, power_floor };
  Form form = Form::constant;
  double eta0 = 0.0;
  double kappa = 0.51;    ///< power_floor exponent, must lie in (1/2, 1)
  double divisor = 1.0;   ///< power_floor: eta0 / ceil(i^kappa / divisor)

  static StepSchedule constant(double eta0) {
    return {Form::constant, eta0, 0.0, 1.0};
  }
  static StepSchedule power_floor(double eta0, double kappa, double divisor) {
    return {Form::power_floor, eta0, kappa, divisor};
  }
};

/// Step size at iteration i >= 1.
double step_size(const StepSchedule& schedule, std::int64_t i);

/// Schedules for the direct method: v_i = v0 / ceil(sqrt(i)/v_divisor),
/// ell_i = ell0 * ceil(i/block), n_i = n0 * ceil(i/block).
struct DirectParamSchedule {
  double v0 = 0.01;
  std::int64_t ell0 = 20;
  std::int64_t n0 = 300;
  double v_divisor = 250.0;
  double block = 40000.0;

  ZeroOrderParams at(std::int64_t i) const;
};

/// Bias-norm model b0 * (i + offset)^(-beta); beta = 0 gives a constant
/// bias.
struct BiasSpec {
  double b0 = 0.0;
  double beta = 0.0;
  double offset = 0.0;

  double at(std::int64_t i) const;
};

struct Deltas {
  double delta1 = 0.04;
  double delta2 = 0.04;
  double delta3 = 0.02;
};

/// Numeric evaluation of the step-size/bias conditions: partial sums to
/// `horizon` plus integral tail bounds.
struct ScheduleReport {
  double epsilon = 0;            ///< ((sqrt(1+4 eps'^2)-1)/2)^2, eps' = J0 - C(K0)
  double sum_eta_sq = 0;         ///< sum eta_i^2 (tail-bounded; inf if divergent)
  double sum_eta_bias = 0;       ///< sum eta_i * bias_i (tail-bounded)
  double sup_eta = 0;
  double threshold_eta_sq_1 = 0; ///< delta1 eps / (alpha1 + c)
  double threshold_eta_sq_2 = 0; ///< r(J0)^2 delta3 / c
  double threshold_bias = 0;     ///< sqrt(delta2 eps / alpha2)
  bool cond_eta_below_mu = false;
  bool cond_sum_sq_1 = false;
  bool cond_sum_sq_2 = false;
  bool cond_bias = false;
  bool passes = false;
  /// Largest factor by which eta0 could be scaled while all conditions
  /// still hold (>= 1 means the schedule passes as given).
  double eta0_max_scale = 0;
};

/// Evaluates the convergence conditions for a schedule against a bias-decay
/// bound. `cost_at_init` is C(K0); `second_moment` is the oracle bound c
/// (defaults to the indirect reference bound stored in `consts`).
ScheduleReport validate_schedule(const LevelConstants& consts,
                                 const StepSchedule& schedule,
                                 const BiasSpec& bias, const Deltas& deltas,
                                 std::int64_t horizon, double cost_at_init,
                                 std::optional<double> second_moment = {});

/// One record per monitored iteration of a run.
struct RunRecord {
  std::int64_t iteration = 0;
  double cost = 0;
  double gap = 0;               ///< cost - C(K*)
  double grad_est_norm = 0;
  bool in_level_set = false;
  bool step_radius_ok = false;  ///< ||K_{i+1} - K_i||_F <= r(J0)
  bool destabilized = false;
  std::int64_t samples_consumed = 0;
};

using RunMatrix = std::vector<std::vector<RunRecord>>;

struct SyntheticBiasSpec {
  double mean_norm0 = 0.05;     ///< norm of the bias mean at i = 1
  double mean_decay_beta = 0.0; ///< 0 for constant, 0.5 for ~ i^{-1/2}
  double entry_variance = 0.001;
};

struct RunOptions {
  std::int64_t record_stride = 100;  ///< record every k-th iteration
  double j0_multiplier = 2.0;        ///< J0 = multiplier * C(K0)
  std::optional<double> j0;          ///< absolute override
  int threads = 0;                   ///< 0: LQRPG_THREADS or hardware
};

/// Gradient step K' = K - eta * g_hat.
Gain pg_update(const Gain& k, const Matrix& g_hat, double eta);

/// SGD with the exact gradient plus an artificial bias: a per-run random
/// unit-Frobenius mean direction scaled by the bias-norm schedule, plus iid
/// Gaussian entry noise. Destabilization discards the rest of the run.
RunMatrix run_synthetic_biased(const LinearSystem& sys, const LqrCost& lc,
                               const Gain& k0, const StepSchedule& schedule,
                               const SyntheticBiasSpec& bias, int runs,
                               std::int64_t iters, std::uint64_t master_seed,
                               const RunOptions& opts = {});

struct IndirectRunConfig {
  std::int64_t t0 = 50;
  bool off_policy = false;  ///< excite with fixed K0 instead of the iterate
  PersistencyParams persistency{1, 1, 0.0};
};

/// Online identification-in-the-loop policy gradient: one dithered
/// closed-loop sample per iteration, recursive update, model-based gradient,
/// SGD step. Model instability skips the step and keeps ingesting data.
RunMatrix run_indirect_pg(const LinearSystem& sys, const LqrCost& lc,
                          const Gain& k0, const StepSchedule& schedule,
                          const IndirectRunConfig& cfg, int runs,
                          std::int64_t iters, std::uint64_t master_seed,
                          const RunOptions& opts = {});

struct DirectRunParams {
  bool adaptive = false;
  ZeroOrderParams fixed{0.01, 20, 300};
  DirectParamSchedule schedule{};
};

/// Zeroth-order policy gradient with fixed or scheduled (v, ell, n).
RunMatrix run_direct_pg(const LinearSystem& sys, const LqrCost& lc,
                        const Gain& k0, const StepSchedule& schedule,
                        const DirectRunParams& params, int runs,
                        std::int64_t iters, std::uint64_t master_seed,
                        const RunOptions& opts = {});

}  // namespace lqrpg
