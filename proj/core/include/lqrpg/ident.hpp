#pragma once

#include "lqrpg/lqr.hpp"
#include "lqrpg/oracle.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace lqrpg {

/// Running least-squares estimate theta_hat = [A_hat B_hat] with information
/// matrix H = sum d d' (batch-init contribution included). An explicit
/// inverse is maintained by rank-1 updates and refactored periodically.
class RlsState {
 public:
  /// Batch initialization over t0 regressor/next-state pairs. H0 must be
  /// invertible; throws InsufficientExcitationError otherwise.
  static RlsState batch_init(const std::vector<Vector>& regressors,
                             const std::vector<Vector>& next_states);

  /// Rank-1 update: H += d d'; theta += (x_next - theta d) d' H^{-1}.
  void update(const Vector& d, const Vector& x_next);

  const Matrix& theta_hat() const { return theta_; }
  const Matrix& information() const { return H_; }
  std::int64_t sample_count() const { return count_; }

  Matrix a_hat(Eigen::Index nx) const { return theta_.leftCols(nx); }
  Matrix b_hat(Eigen::Index nx) const {
    return theta_.rightCols(theta_.cols() - nx);
  }

  /// Spectral-norm estimation error against the true [A B].
  double error_vs(const Matrix& a, const Matrix& b) const;

 private:
  RlsState() = default;
  void refactor();

  Matrix theta_;  // nx x (nx+nu)
  Matrix H_;      // (nx+nu) x (nx+nu)
  Matrix Hinv_;
  std::int64_t count_ = 0;
  std::int64_t updates_since_refactor_ = 0;
};

/// Block-wise excitation floor: window N, stride M, minimum eigenvalue alpha.
struct PersistencyParams {
  int N = 1;
  int M = 1;
  double alpha = 0.0;
};

struct PersistencyResult {
  bool persistent = false;
  std::int64_t first_violation_block = -1;  ///< -1 when persistent
  double min_block_eigenvalue = 0.0;
};

/// Checks that every length-N block starting at indices M*q (0-based; block
/// starts j = Mq+1 in 1-based counting) has Gram minimum eigenvalue >= alpha.
PersistencyResult local_persistency_check(const std::vector<Vector>& regressors,
                                          const PersistencyParams& params);

/// Gradient oracle built on the current model estimate. Throws
/// ModelInstabilityError when the estimated closed loop is unstable.
OracleSample indirect_oracle(const RlsState& state, const LinearSystem& sys,
                             const LqrCost& lc, const Gain& k);

/// Bias bound p(J0, p_theta'(J0)) * E||Delta theta||; requires the expected
/// error within the regime radius.
double indirect_bias_bound(const LevelConstants& consts,
                           double expected_dtheta);

/// Second-moment bound (p p_theta)^2 + 2 b_grad p p_theta + b_grad^2.
double indirect_second_moment_bound(const LevelConstants& consts,
                                    double p_val);

/// Expected estimation-error bound sqrt(c_x max{N,M}^2 / (alpha^2 (n+t0))).
double rls_error_rate_bound(double c_x, const PersistencyParams& params,
                            std::int64_t t0, std::int64_t n);

/// Smallest initial data length guaranteeing the bound beta, together with
/// its minimum-window constraint.
double rls_t0_threshold(double c_x, const PersistencyParams& params,
                        double beta);

/// Probability floor 1 - sqrt(c_x max{N,M}^2 / (beta^2 alpha^2 t0)).
double rls_probability_floor(double c_x, const PersistencyParams& params,
                             double beta, std::int64_t t0);

/// c_x = trace(Sigma_w) [(1 + Kbar^2) xbar + trace(Sigma_e)].
double rls_cx(const LinearSystem& sys, double k_bar, double x_bar);

}  // namespace lqrpg
