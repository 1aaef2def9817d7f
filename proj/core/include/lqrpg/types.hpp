#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace lqrpg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};
struct NumericError : Error {
  using Error::Error;
};
struct InstabilityError : Error {
  using Error::Error;
};
// The closed loop predicted by the current model estimate is unstable; the
// caller decides the fallback.
struct ModelInstabilityError : Error {
  using Error::Error;
};
struct NonConvergenceError : Error {
  using Error::Error;
};
struct InsufficientExcitationError : Error {
  using Error::Error;
};
struct OutOfRegimeError : Error {
  using Error::Error;
};
struct EstimationFailureError : Error {
  using Error::Error;
};
struct InvalidLevelError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Square matrix checked to be symmetric and positive semidefinite on
/// construction. Symmetry tolerance 1e-10*(1+max|M|); eigenvalues may dip to
/// -1e-10*(1+lambda_max) to absorb roundoff.
class SymmetricPsd {
 public:
  explicit SymmetricPsd(Matrix m);

  const Matrix& mat() const { return m_; }
  operator const Matrix&() const { return m_; }
  Eigen::Index rows() const { return m_.rows(); }

  double min_eigenvalue() const { return min_eig_; }
  double max_eigenvalue() const { return max_eig_; }
  bool strictly_positive_definite() const { return min_eig_ > 0.0; }

  static SymmetricPsd identity(Eigen::Index n) {
    return SymmetricPsd(Matrix::Identity(n, n));
  }
  static SymmetricPsd zero(Eigen::Index n) {
    return SymmetricPsd(Matrix::Zero(n, n));
  }

 private:
  Matrix m_;
  double min_eig_ = 0.0;
  double max_eig_ = 0.0;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw DimensionError(msg);
}

}  // namespace lqrpg
