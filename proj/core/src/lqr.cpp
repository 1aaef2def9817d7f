#include "lqrpg/lqr.hpp"

#include <cmath>

namespace lqrpg {

namespace {

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double min_eigenvalue_sym(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

LinearSystem::LinearSystem(Matrix a, Matrix b, SymmetricPsd sw,
                           SymmetricPsd s0, SymmetricPsd se)
    : A(std::move(a)),
      B(std::move(b)),
      sigma_w(std::move(sw)),
      sigma_0(std::move(s0)),
      sigma_e(std::move(se)) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  require(A.cols() == n, "LinearSystem: A must be square");
  require(B.rows() == n, "LinearSystem: B row count must match A");
  require(sigma_w.rows() == n, "LinearSystem: sigma_w dimension");
  require(sigma_0.rows() == n, "LinearSystem: sigma_0 dimension");
  require(sigma_e.rows() == m, "LinearSystem: sigma_e dimension");
  if (!all_finite(A) || !all_finite(B))
    throw NumericError("LinearSystem: non-finite entries");
  if (!sigma_w.strictly_positive_definite())
    throw NumericError("LinearSystem: sigma_w must be strictly PD");
  if (!sigma_0.strictly_positive_definite())
    throw NumericError("LinearSystem: sigma_0 must be strictly PD");
  // Stabilizability probe: the Riccati iteration on (A, B, I, I) converges
  // iff a stabilizing gain exists.
  solve_dare(A, B, Matrix::Identity(n, n), Matrix::Identity(m, m));
}

LqrCost::LqrCost(SymmetricPsd q, SymmetricPsd r)
    : Q(std::move(q)), R(std::move(r)) {
  if (!Q.strictly_positive_definite())
    throw NumericError("LqrCost: Q must be strictly PD");
  if (!R.strictly_positive_definite())
    throw NumericError("LqrCost: R must be strictly PD");
}

bool is_stabilizing(const LinearSystem& sys, const Gain& k) {
  require(k.K.rows() == sys.nu() && k.K.cols() == sys.nx(),
          "is_stabilizing: gain dimension mismatch");
  return spectral_radius(sys.A + sys.B * k.K) < 1.0 - kStabilityMargin;
}

SymmetricPsd avg_covariance(const LinearSystem& sys, const Gain& k) {
  if (!is_stabilizing(sys, k))
    throw InstabilityError("avg_covariance: gain not stabilizing");
  return SymmetricPsd(
      detail::lyapunov_ctrl_raw(sys.A + sys.B * k.K, sys.sigma_w.mat()));
}

namespace detail {

LqrData lqr_data(const LinearSystem& sys, const LqrCost& lc, const Gain& k) {
  const Matrix f = sys.A + sys.B * k.K;
  if (spectral_radius(f) >= 1.0 - kStabilityMargin)
    throw InstabilityError("lqr_data: gain not stabilizing");
  Matrix qk = lc.Q.mat() + k.K.transpose() * lc.R.mat() * k.K;
  LqrData d;
  d.P = lyapunov_obs_raw(f, qk);
  d.Sigma = lyapunov_ctrl_raw(f, sys.sigma_w.mat());
  Matrix btp = sys.B.transpose() * d.P;
  d.E = (lc.R.mat() + btp * sys.B) * k.K + btp * sys.A;
  d.gradient = 2.0 * d.E * d.Sigma;
  d.cost = (d.P * sys.sigma_w.mat()).trace();
  return d;
}

}  // namespace detail

double cost(const LinearSystem& sys, const LqrCost& lc, const Gain& k) {
  return detail::lqr_data(sys, lc, k).cost;
}

Matrix exact_gradient(const LinearSystem& sys, const LqrCost& lc,
                      const Gain& k) {
  return detail::lqr_data(sys, lc, k).gradient;
}

Matrix model_gradient(const Matrix& a_hat, const Matrix& b_hat,
                      const LqrCost& lc, const SymmetricPsd& sigma_w,
                      const Gain& k) {
  require(a_hat.rows() == a_hat.cols() && b_hat.rows() == a_hat.rows() &&
              k.K.rows() == b_hat.cols() && k.K.cols() == a_hat.cols(),
          "model_gradient: dimension mismatch");
  const Matrix f = a_hat + b_hat * k.K;
  if (spectral_radius(f) >= 1.0 - kStabilityMargin)
    throw ModelInstabilityError("model_gradient: estimated closed loop unstable");
  Matrix qk = lc.Q.mat() + k.K.transpose() * lc.R.mat() * k.K;
  Matrix p = detail::lyapunov_obs_raw(f, qk);
  Matrix s = detail::lyapunov_ctrl_raw(f, sigma_w.mat());
  Matrix btp = b_hat.transpose() * p;
  Matrix e = (lc.R.mat() + btp * b_hat) * k.K + btp * a_hat;
  return 2.0 * e * s;
}

bool in_level_set(const LinearSystem& sys, const LqrCost& lc, const Gain& k,
                  double j0) {
  if (!is_stabilizing(sys, k)) return false;
  return cost(sys, lc, k) <= j0;
}

void AnalysisContext::init_norms(const LinearSystem& sys, const LqrCost& lc) {
  norm_A_ = operator_norm(sys.A);
  norm_B_ = operator_norm(sys.B);
  norm_R_ = operator_norm(lc.R.mat());
  lmin_Q_ = min_eigenvalue_sym(lc.Q.mat());
  lmin_R_ = min_eigenvalue_sym(lc.R.mat());
  lmin_sw_ = min_eigenvalue_sym(sys.sigma_w.mat());
  lmin_s0_ = min_eigenvalue_sym(sys.sigma_0.mat());
  norm_s0_ = operator_norm(sys.sigma_0.mat());
  tr_sw_ = sys.sigma_w.mat().trace();
  nx_ = sys.nx();
  nu_ = sys.nu();
}

AnalysisContext::AnalysisContext(const LinearSystem& sys, const LqrCost& lc) {
  init_norms(sys, lc);
  DareSolution opt = solve_dare(sys.A, sys.B, lc.Q.mat(), lc.R.mat());
  k_star_ = Gain{opt.K};
  c_star_ = (opt.P.mat() * sys.sigma_w.mat()).trace();
  norm_K_star_ = operator_norm(opt.K);
  Matrix sig_star =
      detail::lyapunov_ctrl_raw(sys.A + sys.B * opt.K, sys.sigma_w.mat());
  norm_sig_star_ = operator_norm(sig_star);
  // Literal reading ||(sigma_w^2)^{-1}||; equals ||sigma_w^{-1}||^2 for
  // symmetric PD noise.
  mu_ = 0.25 * norm_sig_star_ / (lmin_sw_ * lmin_sw_ * lmin_R_);
}

AnalysisContext::AnalysisContext(const LinearSystem& sys, const LqrCost& lc,
                                 const LevelConstants& consts) {
  init_norms(sys, lc);
  c_star_ = consts.C_star;
  norm_K_star_ = consts.norm_K_star;
  norm_sig_star_ = consts.norm_sigma_K_star;
  mu_ = consts.mu;
}

double AnalysisContext::alpha6(double z) const {
  return std::sqrt(std::max(0.0, z - c_star_) / lmin_sw_ *
                   (norm_R_ + norm_B_ * norm_B_ * z / lmin_sw_));
}

double AnalysisContext::grad_norm_bound(double z) const {
  return 2.0 * (z / lmin_Q_) * alpha6(z);
}

double AnalysisContext::gain_norm_bound(double z) const {
  return (norm_B_ * norm_A_ * z / lmin_sw_ + alpha6(z)) / lmin_R_;
}

double AnalysisContext::lipschitz_radius(double z) const {
  return lmin_sw_ * lmin_Q_ /
         (4.0 * z * norm_B_ * (norm_A_ + norm_B_ * gain_norm_bound(z) + 1.0));
}

double AnalysisContext::sigma_lipschitz(double z) const {
  return z / (lmin_Q_ * lipschitz_radius(z));
}

double AnalysisContext::alpha5(double z) const {
  const double bk = gain_norm_bound(z);
  const double q = z / (lmin_sw_ * lmin_Q_);
  return 2.0 * norm_R_ * q * q *
         (2.0 * bk + norm_K_star_ +
          bk * bk * norm_B_ * (norm_A_ + norm_B_ * bk + 1.0));
}

double AnalysisContext::cost_lipschitz(double z) const {
  return alpha5(z) * tr_sw_;
}

double AnalysisContext::grad_lipschitz(double z) const {
  const double a3 = 2.0 * sigma_lipschitz(z) * alpha6(z);
  const double bk = gain_norm_bound(z);
  const double a4 =
      norm_R_ + norm_B_ * norm_B_ * z / lmin_s0_ +
      alpha5(z) * (norm_B_ * norm_A_ + (bk + norm_K_star_) * norm_B_ * norm_B_);
  return a3 + a4;
}

double AnalysisContext::smoothness_constant(double z) const {
  return 64.0 * z * (norm_B_ * z + lmin_sw_ * norm_R_) / (lmin_Q_ * lmin_sw_);
}

double AnalysisContext::smoothness_radius(double z) const {
  return lmin_Q_ * lmin_Q_ * lmin_sw_ * lmin_sw_ /
         (32.0 * norm_B_ * z * z *
          (1.0 + norm_A_ + norm_B_ * gain_norm_bound(z)));
}

double AnalysisContext::transient_constant(double z) const {
  return 2.0 * z / lmin_sw_ *
         (norm_s0_ / (lmin_Q_ * lmin_sw_) + z / (lmin_Q_ * lmin_sw_ * lmin_sw_) +
          1.0 / lmin_Q_);
}

double AnalysisContext::grad_domination_mu() const { return mu_; }

double AnalysisContext::model_error_regime(double j0) const {
  const double p2 = (1.0 + norm_A_ + norm_B_ * gain_norm_bound(j0)) *
                    (1.0 + gain_norm_bound(j0));
  return 1.0 / (4.0 * std::max(j0 / lmin_Q_, j0 / lmin_sw_) * p2);
}

double AnalysisContext::model_error_gain(double z, double p_theta) const {
  const double bk = gain_norm_bound(z);
  const double loop = 1.0 + norm_A_ + norm_B_ * bk;  // 1 + ||A|| + ||B|| ||K||
  const double gk = 1.0 + bk;                        // 1 + ||K||
  const double pw = z / lmin_sw_;                    // ||P_K||, ||Sigma_K|| bound
  const double pq = z / lmin_Q_;
  const double p1 =
      8.0 * std::sqrt(norm_R_ + norm_B_ * norm_B_ * z *
                                    std::max(0.0, z - c_star_) / lmin_Q_) *
      loop * gk * pw * pw;
  const double p2 =
      (pq + (norm_B_ + p_theta) * 4.0 * pq * pq * loop * gk) *
      (norm_A_ + norm_B_ * bk + gk * p_theta);
  const double p3 = norm_B_ * pw * gk;
  const double p4 = pw + 4.0 * pw * pw * loop * gk * p_theta;
  return p1 + 2.0 * p4 * (p2 + p3);
}

LevelConstants level_constants(const LinearSystem& sys, const LqrCost& lc,
                               double j0) {
  AnalysisContext ctx(sys, lc);
  if (!(j0 > ctx.c_star()))
    throw InvalidLevelError("level_constants: J0 must exceed the optimal cost");
  LevelConstants c;
  c.J0 = j0;
  c.C_star = ctx.c_star();
  c.b_grad = ctx.grad_norm_bound(j0);
  c.b_K = ctx.gain_norm_bound(j0);
  c.h = ctx.lipschitz_radius(j0);
  c.h_sigma = ctx.sigma_lipschitz(j0);
  c.h_C = ctx.cost_lipschitz(j0);
  c.h_grad = ctx.grad_lipschitz(j0);
  c.mu = ctx.grad_domination_mu();
  c.L = ctx.smoothness_constant(j0);
  c.r = ctx.smoothness_radius(j0);
  c.eps_prime = ctx.transient_constant(j0);
  c.p_theta_prime = ctx.model_error_regime(j0);
  c.p_level = ctx.model_error_gain(j0, c.p_theta_prime);
  c.c_d = static_cast<double>(std::max(ctx.nx(), ctx.nu())) * c.p_level;
  c.norm_K_star = ctx.norm_K_star();
  c.norm_sigma_K_star = ctx.norm_sigma_K_star();
  c.n_x = static_cast<int>(ctx.nx());
  c.n_u = static_cast<int>(ctx.nu());
  const double nu = static_cast<double>(ctx.nu());
  c.alpha2 = nu * nu * nu * c.b_grad * c.b_grad;
  // Reference oracle for alpha1: the uniform indirect second-moment bound
  // and the worst in-regime bias p * p_theta'.
  const double bias_ref = c.p_level * c.p_theta_prime;
  const double c_ref = bias_ref * bias_ref + 2.0 * c.b_grad * bias_ref +
                       c.b_grad * c.b_grad;
  c.alpha1 = nu * c_ref * c.b_grad * c.b_grad +
             3.0 * std::pow(c.b_grad, 4) +
             2.0 * nu * std::pow(c.b_grad, 3) * bias_ref;
  return c;
}

double model_error_regime_at(const LinearSystem& sys, const LqrCost& lc,
                             const Gain& k) {
  detail::LqrData d = detail::lqr_data(sys, lc, k);
  const double m = std::max(operator_norm(d.Sigma), operator_norm(d.P));
  const double loop = 1.0 + operator_norm(sys.A + sys.B * k.K);
  return 1.0 / (4.0 * m * loop * (1.0 + operator_norm(k.K)));
}

double gradient_error_bound(const LevelConstants& consts,
                            const LinearSystem& sys, const LqrCost& lc,
                            const Gain& k, double delta_theta_norm) {
  detail::LqrData d = detail::lqr_data(sys, lc, k);
  const double p_theta = model_error_regime_at(sys, lc, k);
  if (delta_theta_norm > p_theta)
    throw OutOfRegimeError("gradient_error_bound: model error exceeds regime");
  const double z = d.cost;
  const double na = operator_norm(sys.A);
  const double nb = operator_norm(sys.B);
  const double nr = operator_norm(lc.R.mat());
  const double lq = min_eigenvalue_sym(lc.Q.mat());
  const double lw = min_eigenvalue_sym(sys.sigma_w.mat());
  const double nk = operator_norm(k.K);
  const double np = operator_norm(d.P);
  const double loop = 1.0 + na + nb * nk;
  const double gk = 1.0 + nk;
  const double pw = z / lw;
  const double pq = z / lq;
  const double p1 =
      8.0 *
      std::sqrt(nr + nb * nb * z * std::max(0.0, z - consts.C_star) / lq) *
      loop * gk * pw * pw;
  const double p2 = (pq + (nb + p_theta) * 4.0 * pq * pq * loop * gk) *
                    (na + nb * nk + gk * p_theta);
  const double p3 = nb * np * gk;
  const double p4 = pw + 4.0 * pw * pw * loop * gk * p_theta;
  return (p1 + 2.0 * p4 * (p2 + p3)) * delta_theta_norm;
}

}  // namespace lqrpg
