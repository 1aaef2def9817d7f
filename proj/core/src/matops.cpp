#include "lqrpg/matops.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace lqrpg {

SymmetricPsd::SymmetricPsd(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols())
    throw DimensionError("SymmetricPsd: matrix must be square");
  if (!all_finite(m_)) throw NumericError("SymmetricPsd: non-finite entries");
  const double scale = 1.0 + max_abs(m_);
  const double asym = max_abs(m_ - m_.transpose());
  if (asym > 1e-10 * scale)
    throw NumericError("SymmetricPsd: asymmetry " + std::to_string(asym));
  m_ = 0.5 * (m_ + m_.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericError("SymmetricPsd: eigendecomposition failed");
  min_eig_ = es.eigenvalues().minCoeff();
  max_eig_ = es.eigenvalues().maxCoeff();
  if (min_eig_ < -1e-10 * (1.0 + std::abs(max_eig_)))
    throw NumericError("SymmetricPsd: negative eigenvalue " +
                       std::to_string(min_eig_));
}

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols())
    throw DimensionError("spectral_radius: matrix must be square");
  if (!all_finite(m)) throw NumericError("spectral_radius: non-finite entries");
  if (m.rows() == 0) return 0.0;
  if (m.rows() == 1) return std::abs(m(0, 0));
  const double scale = 1.0 + max_abs(m);
  if (max_abs(m - m.transpose()) <= 1e-14 * scale) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw NumericError("spectral_radius: symmetric eigensolver failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw NumericError("spectral_radius: eigensolver did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace detail {

namespace {

// Direct Kronecker-vectorization solve for small systems, fixed-point
// iteration above the cap.
constexpr Eigen::Index kKroneckerDimCap = 32;

Matrix lyapunov_kron(const Matrix& g, const Matrix& y) {
  const Eigen::Index n = g.rows();
  Matrix m = Matrix::Identity(n * n, n * n);
  // kron(g, g): block (i,j) is g(i,j) * g  [column-major vec convention]
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m.block(i * n, j * n, n, n) -= g(i, j) * g;
  Eigen::Map<const Vector> rhs(y.data(), n * n);
  Vector sol = m.partialPivLu().solve(rhs);
  Matrix p = Eigen::Map<const Matrix>(sol.data(), n, n);
  return 0.5 * (p + p.transpose().eval());
}

Matrix lyapunov_fixed_point(const Matrix& g, const Matrix& y) {
  Matrix p = y;
  Matrix next(p.rows(), p.cols());
  for (int it = 0; it < 200000; ++it) {
    next.noalias() = g * p * g.transpose();
    next += y;
    const double delta = max_abs(next - p);
    p.swap(next);
    if (delta <= 1e-14 * (1.0 + max_abs(p))) return 0.5 * (p + p.transpose().eval());
  }
  throw NonConvergenceError("lyapunov fixed-point iteration did not converge");
}

// Solves P = G P G' + Y.
Matrix lyapunov_core(const Matrix& g, const Matrix& y) {
  Matrix p = g.rows() <= kKroneckerDimCap ? lyapunov_kron(g, y)
                                          : lyapunov_fixed_point(g, y);
  const double resid = max_abs(p - g * p * g.transpose() - y);
  if (resid > 1e-10 * (1.0 + max_abs(p)))
    throw NumericError("lyapunov residual " + std::to_string(resid));
  return p;
}

}  // namespace

Matrix lyapunov_obs_raw(const Matrix& f, const Matrix& y) {
  if (f.rows() != f.cols()) throw DimensionError("lyapunov: F must be square");
  if (y.rows() != f.rows() || y.cols() != f.cols())
    throw DimensionError("lyapunov: dimension mismatch between F and Y");
  if (spectral_radius(f) >= 1.0 - kStabilityMargin)
    throw InstabilityError("lyapunov: spectral radius >= 1");
  // Obs form P = F'PF + Y is the ctrl form in F'.
  return lyapunov_core(f.transpose(), y);
}

Matrix lyapunov_ctrl_raw(const Matrix& f, const Matrix& y) {
  if (f.rows() != f.cols()) throw DimensionError("lyapunov: F must be square");
  if (y.rows() != f.rows() || y.cols() != f.cols())
    throw DimensionError("lyapunov: dimension mismatch between F and Y");
  if (spectral_radius(f) >= 1.0 - kStabilityMargin)
    throw InstabilityError("lyapunov: spectral radius >= 1");
  return lyapunov_core(f, y);
}

}  // namespace detail

SymmetricPsd solve_lyapunov_obs(const Matrix& f, const SymmetricPsd& y) {
  return SymmetricPsd(detail::lyapunov_obs_raw(f, y.mat()));
}

SymmetricPsd solve_lyapunov_ctrl(const Matrix& f, const SymmetricPsd& y) {
  return SymmetricPsd(detail::lyapunov_ctrl_raw(f, y.mat()));
}

DareSolution solve_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                        const Matrix& r) {
  const Eigen::Index nx = a.rows();
  const Eigen::Index nu = b.cols();
  if (a.cols() != nx || b.rows() != nx || q.rows() != nx || q.cols() != nx ||
      r.rows() != nu || r.cols() != nu)
    throw DimensionError("solve_dare: inconsistent dimensions");

  Matrix p = q;
  Matrix next(nx, nx);
  int iterations = 0;
  double delta = 0.0;
  constexpr int kMaxIterations = 100000;
  for (; iterations < kMaxIterations; ++iterations) {
    Matrix btp = b.transpose() * p;
    Matrix gram = r + btp * b;
    Matrix btpa = btp * a;
    next.noalias() = a.transpose() * p * a;
    next -= btpa.transpose() * gram.llt().solve(btpa);
    next += q;
    delta = max_abs(next - p);
    p = 0.5 * (next + next.transpose().eval());
    if (delta <= 1e-12 * (1.0 + max_abs(p))) break;
  }

  Matrix btp = b.transpose() * p;
  Matrix gram = r + btp * b;
  Matrix k = -gram.llt().solve(btp * a);
  Matrix btpa = btp * a;
  Matrix resid_m =
      p - q - a.transpose() * p * a + btpa.transpose() * gram.llt().solve(btpa);
  const double resid = max_abs(resid_m);
  if (iterations >= kMaxIterations || resid > 1e-9 * (1.0 + max_abs(p)))
    throw NonConvergenceError("solve_dare: no convergence, last residual " +
                              std::to_string(resid));
  if (spectral_radius(a + b * k) >= 1.0 - kStabilityMargin)
    throw InstabilityError("solve_dare: resulting gain not stabilizing");
  return DareSolution{SymmetricPsd(p), std::move(k), resid, iterations};
}

}  // namespace lqrpg
