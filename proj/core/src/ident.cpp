#include "lqrpg/ident.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace lqrpg {

namespace {
constexpr std::int64_t kRefactorInterval = 10000;
}

RlsState RlsState::batch_init(const std::vector<Vector>& regressors,
                              const std::vector<Vector>& next_states) {
  if (regressors.empty() || regressors.size() != next_states.size())
    throw DimensionError("batch_init: regressor/state count mismatch");
  const Eigen::Index d = regressors.front().size();
  const Eigen::Index nx = next_states.front().size();
  if (static_cast<Eigen::Index>(regressors.size()) < d)
    throw InsufficientExcitationError(
        "batch_init: need at least dim(d) samples");

  Matrix h = Matrix::Zero(d, d);
  Matrix cross = Matrix::Zero(nx, d);
  for (std::size_t i = 0; i < regressors.size(); ++i) {
    if (regressors[i].size() != d || next_states[i].size() != nx)
      throw DimensionError("batch_init: inconsistent sample dimensions");
    h.noalias() += regressors[i] * regressors[i].transpose();
    cross.noalias() += next_states[i] * regressors[i].transpose();
  }
  Eigen::FullPivLU<Matrix> lu(h);
  if (!lu.isInvertible())
    throw InsufficientExcitationError("batch_init: singular information matrix");

  RlsState s;
  s.H_ = h;
  s.Hinv_ = lu.inverse();
  s.theta_ = cross * s.Hinv_;
  s.count_ = static_cast<std::int64_t>(regressors.size());
  return s;
}

void RlsState::refactor() {
  Hinv_ = H_.fullPivLu().inverse();
  updates_since_refactor_ = 0;
}

void RlsState::update(const Vector& d, const Vector& x_next) {
  if (d.size() != H_.rows() || x_next.size() != theta_.rows())
    throw DimensionError("rls update: dimension mismatch");
  H_.noalias() += d * d.transpose();
  // Rank-1 inverse update for the new information matrix.
  Vector hd = Hinv_ * d;
  const double denom = 1.0 + d.dot(hd);
  Hinv_.noalias() -= (hd * hd.transpose()) / denom;
  if (++updates_since_refactor_ >= kRefactorInterval) refactor();
  Vector innovation = x_next - theta_ * d;
  theta_.noalias() += innovation * (Hinv_ * d).transpose();
  ++count_;
}

double RlsState::error_vs(const Matrix& a, const Matrix& b) const {
  Matrix truth(a.rows(), a.cols() + b.cols());
  truth << a, b;
  Eigen::JacobiSVD<Matrix> svd(theta_ - truth);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

PersistencyResult local_persistency_check(
    const std::vector<Vector>& regressors, const PersistencyParams& params) {
  if (params.N < 1 || params.M < 1 || !(params.alpha > 0.0))
    throw DimensionError("local_persistency_check: invalid parameters");
  const std::int64_t len = static_cast<std::int64_t>(regressors.size());
  const std::int64_t window = std::max(params.N, params.M);
  if (len < window)
    throw DimensionError("local_persistency_check: sequence too short");
  const Eigen::Index d = regressors.front().size();

  PersistencyResult res;
  res.persistent = true;
  res.min_block_eigenvalue = std::numeric_limits<double>::infinity();
  // Sequence d_0..d_{n}; blocks start at j = Mq+1 for
  // q in [0, floor(n / max{N,M}) - 1].
  const std::int64_t n = len - 1;
  const std::int64_t blocks = n / window;
  for (std::int64_t q = 0; q < blocks; ++q) {
    const std::int64_t start = params.M * q + 1;
    if (start + params.N - 1 > n) break;
    Matrix gram = Matrix::Zero(d, d);
    for (int k = 0; k < params.N; ++k) {
      const Vector& v = regressors[static_cast<std::size_t>(start + k)];
      gram.noalias() += v * v.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    res.min_block_eigenvalue = std::min(res.min_block_eigenvalue, lmin);
    if (lmin < params.alpha && res.persistent) {
      res.persistent = false;
      res.first_violation_block = q;
    }
  }
  return res;
}

OracleSample indirect_oracle(const RlsState& state, const LinearSystem& sys,
                             const LqrCost& lc, const Gain& k) {
  const Eigen::Index nx = sys.nx();
  OracleSample s;
  s.method = OracleMethod::indirect;
  s.gradient = model_gradient(state.a_hat(nx), state.b_hat(nx), lc,
                              sys.sigma_w, k);
  s.samples_consumed = state.sample_count();
  s.delta_theta_norm = state.error_vs(sys.A, sys.B);
  return s;
}

double indirect_bias_bound(const LevelConstants& consts,
                           double expected_dtheta) {
  if (expected_dtheta < 0.0 || expected_dtheta > consts.p_theta_prime)
    throw OutOfRegimeError("indirect_bias_bound: expected error out of regime");
  return consts.p_level * expected_dtheta;
}

double indirect_second_moment_bound(const LevelConstants& consts,
                                    double p_val) {
  const double bias = p_val * consts.p_theta_prime;
  return bias * bias + 2.0 * consts.b_grad * bias +
         consts.b_grad * consts.b_grad;
}

double rls_error_rate_bound(double c_x, const PersistencyParams& params,
                            std::int64_t t0, std::int64_t n) {
  const double window = static_cast<double>(std::max(params.N, params.M));
  return std::sqrt(c_x * window * window /
                   (params.alpha * params.alpha *
                    static_cast<double>(n + t0)));
}

double rls_t0_threshold(double c_x, const PersistencyParams& params,
                        double beta) {
  const double window = static_cast<double>(std::max(params.N, params.M));
  return std::max(c_x * window * window /
                      (params.alpha * params.alpha * beta * beta),
                  window);
}

double rls_probability_floor(double c_x, const PersistencyParams& params,
                             double beta, std::int64_t t0) {
  const double window = static_cast<double>(std::max(params.N, params.M));
  return 1.0 - std::sqrt(c_x * window * window /
                         (beta * beta * params.alpha * params.alpha *
                          static_cast<double>(t0)));
}

double rls_cx(const LinearSystem& sys, double k_bar, double x_bar) {
  return sys.sigma_w.mat().trace() *
         ((1.0 + k_bar * k_bar) * x_bar + sys.sigma_e.mat().trace());
}

}  // namespace lqrpg
