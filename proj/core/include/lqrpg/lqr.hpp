#pragma once

#include "lqrpg/matops.hpp"
#include "lqrpg/types.hpp"

namespace lqrpg {

/// Plant x+ = A x + B u + w with Gaussian process noise, initial-state
/// covariance and (possibly zero) dither covariance for excitation inputs.
struct LinearSystem {
  Matrix A;
  Matrix B;
  SymmetricPsd sigma_w;  ///< process noise covariance, strictly PD
  SymmetricPsd sigma_0;  ///< initial state covariance, strictly PD
  SymmetricPsd sigma_e;  ///< dither covariance, may be zero

  LinearSystem(Matrix a, Matrix b, SymmetricPsd sw, SymmetricPsd s0,
               SymmetricPsd se);

  Eigen::Index nx() const { return A.rows(); }
  Eigen::Index nu() const { return B.cols(); }
};

struct LqrCost {
  SymmetricPsd Q;  ///< strictly PD
  SymmetricPsd R;  ///< strictly PD

  LqrCost(SymmetricPsd q, SymmetricPsd r);
};

/// Static feedback u = K x. Stability is relative to a system.
struct Gain {
  Matrix K;
};

bool is_stabilizing(const LinearSystem& sys, const Gain& k);

/// Steady-state average state covariance of the stable closed loop.
SymmetricPsd avg_covariance(const LinearSystem& sys, const Gain& k);

/// Infinite-horizon average cost trace(P_K sigma_w).
double cost(const LinearSystem& sys, const LqrCost& lc, const Gain& k);

/// Gradient of the average cost with respect to the gain: 2 E_K Sigma_K.
Matrix exact_gradient(const LinearSystem& sys, const LqrCost& lc,
                      const Gain& k);

/// Gradient assembled from model estimates (A_hat, B_hat) but the true
/// process-noise covariance. Coincides with exact_gradient when the
/// estimates are exact. Throws ModelInstabilityError when the estimated
/// closed loop is unstable.
Matrix model_gradient(const Matrix& a_hat, const Matrix& b_hat,
                      const LqrCost& lc, const SymmetricPsd& sigma_w,
                      const Gain& k);

bool in_level_set(const LinearSystem& sys, const LqrCost& lc, const Gain& k,
                  double j0);

namespace detail {

// One-pass evaluation of the quantities every loop needs; P and Sigma are
// the two Lyapunov solutions for the closed loop.
struct LqrData {
  Matrix P;
  Matrix Sigma;
  Matrix E;
  Matrix gradient;
  double cost;
};
LqrData lqr_data(const LinearSystem& sys, const LqrCost& lc, const Gain& k);

}  // namespace detail

/// Analysis constants frozen at a cost level J0 (level set {C(K) <= J0}).
struct LevelConstants {
  double J0 = 0;
  double C_star = 0;        ///< optimal cost
  double b_grad = 0;        ///< gradient-norm bound over the level set
  double b_K = 0;           ///< gain-norm bound over the level set
  double h = 0;             ///< covariance Lipschitz radius
  double h_sigma = 0;       ///< Lipschitz constant of Sigma_K
  double h_C = 0;           ///< Lipschitz constant of the cost
  double h_grad = 0;        ///< Lipschitz constant of the gradient
  double mu = 0;            ///< gradient-domination constant
  double L = 0;             ///< quasi-smoothness constant
  double r = 0;             ///< quasi-smoothness radius
  double alpha1 = 0;        ///< second-moment polynomial at the reference oracle
  double alpha2 = 0;        ///< nu^3 * b_grad^2
  double eps_prime = 0;     ///< finite-horizon transient constant at J0
  double p_theta_prime = 0; ///< model-error regime radius uniform over the level set
  double p_level = 0;       ///< gradient-error gain p(J0, p_theta_prime)
  double c_d = 0;           ///< max{nx, nu} * p_level
  double norm_K_star = 0;   ///< operator norm of the optimal gain
  double norm_sigma_K_star = 0;
  int n_x = 0;
  int n_u = 0;
};

/// Scalar system data from which every analysis constant derives. Built once
/// per (system, cost); functions of the cost level z are evaluated on demand.
class AnalysisContext {
 public:
  AnalysisContext(const LinearSystem& sys, const LqrCost& lc);

  /// Cheap rebuild reusing the optimal-cost data already frozen in `consts`
  /// (no Riccati solve).
  AnalysisContext(const LinearSystem& sys, const LqrCost& lc,
                  const LevelConstants& consts);

  double norm_A() const { return norm_A_; }
  double norm_B() const { return norm_B_; }
  double norm_R() const { return norm_R_; }
  double lambda_min_Q() const { return lmin_Q_; }
  double lambda_min_R() const { return lmin_R_; }
  double lambda_min_sigma_w() const { return lmin_sw_; }
  double lambda_min_sigma_0() const { return lmin_s0_; }
  double norm_sigma_0() const { return norm_s0_; }
  double trace_sigma_w() const { return tr_sw_; }
  double c_star() const { return c_star_; }
  double norm_K_star() const { return norm_K_star_; }
  double norm_sigma_K_star() const { return norm_sig_star_; }
  Eigen::Index nx() const { return nx_; }
  Eigen::Index nu() const { return nu_; }
  const Gain& k_star() const { return k_star_; }

  // Level functions: each takes a cost value z >= C(K*).
  double grad_norm_bound(double z) const;       // b_grad
  double gain_norm_bound(double z) const;       // b_K
  double lipschitz_radius(double z) const;      // h
  double sigma_lipschitz(double z) const;       // h_sigma
  double cost_lipschitz(double z) const;        // h_C
  double grad_lipschitz(double z) const;        // h_grad
  double smoothness_constant(double z) const;   // L
  double smoothness_radius(double z) const;     // r
  double transient_constant(double z) const;    // eps'
  double grad_domination_mu() const;            // mu
  double model_error_regime(double j0) const;   // p_theta'
  /// Gradient-error gain p(z, p_theta) in level form (gain norms replaced by
  /// their level-set bounds).
  double model_error_gain(double z, double p_theta) const;

 private:
  void init_norms(const LinearSystem& sys, const LqrCost& lc);
  double alpha6(double z) const;
  double alpha5(double z) const;

  double norm_A_, norm_B_, norm_R_, lmin_Q_, lmin_R_, lmin_sw_, lmin_s0_,
      norm_s0_, tr_sw_, c_star_, norm_K_star_, norm_sig_star_, mu_;
  Eigen::Index nx_, nu_;
  Gain k_star_;
};

/// Snapshot of every analysis constant at level J0 (> C(K*); the optimal
/// cost is computed internally).
LevelConstants level_constants(const LinearSystem& sys, const LqrCost& lc,
                               double j0);

/// Bound on the gradient error induced by a model error of the given norm,
/// evaluated at the specific gain K. Requires delta_theta_norm within the
/// regime radius of K.
double gradient_error_bound(const LevelConstants& consts,
                            const LinearSystem& sys, const LqrCost& lc,
                            const Gain& k, double delta_theta_norm);

/// Regime radius p_theta at a specific gain.
double model_error_regime_at(const LinearSystem& sys, const LqrCost& lc,
                             const Gain& k);

}  // namespace lqrpg
