#pragma once

#include "lqrpg/types.hpp"

namespace lqrpg {

/// Schur stability is strict: rho < 1 - kStabilityMargin.
inline constexpr double kStabilityMargin = 1e-12;

/// Largest eigenvalue modulus of a square matrix. Symmetric inputs take the
/// selfadjoint path.
double spectral_radius(const Matrix& m);

/// Solve P = F^T P F + Y for Schur-stable F and PSD Y.
/// Residual max|P - F^T P F - Y| <= 1e-10 * (1 + max|P|).
SymmetricPsd solve_lyapunov_obs(const Matrix& f, const SymmetricPsd& y);

/// Solve S = F S F^T + Y (the transposed recursion).
SymmetricPsd solve_lyapunov_ctrl(const Matrix& f, const SymmetricPsd& y);

struct DareSolution {
  SymmetricPsd P;     ///< fixed point of the Riccati map
  Matrix K;           ///< optimal gain -(R + B'PB)^{-1} B'PA
  double residual;    ///< max-abs residual of the Riccati equation
  int iterations;
};

/// Fixed-point iteration of the Riccati map from P0 = Q (tolerance 1e-12,
/// cap 100000 iterations). Requires (A,B) stabilizable and Q, R > 0.
DareSolution solve_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                        const Matrix& r);

namespace detail {

// Unvalidated solver cores for hot loops: skip the PSD wrapper, still throw
// InstabilityError when rho(F) >= 1.
Matrix lyapunov_obs_raw(const Matrix& f, const Matrix& y);
Matrix lyapunov_ctrl_raw(const Matrix& f, const Matrix& y);

}  // namespace detail

}  // namespace lqrpg
