#pragma once

#include "lqrpg/types.hpp"

#include <cstdint>
#include <random>

namespace lqrpg {

/// Seeded random stream. Identical (seed, stream_id) pairs reproduce the
/// same draw sequence bit for bit; distinct stream_ids give independent
/// streams. Single-owner: do not share one stream across threads.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform draw in (0, 1].
  double uniform01();

  /// Standard normal via Box-Muller (pairs cached), fully specified by this
  /// implementation rather than the standard library's unspecified
  /// normal_distribution.
  double gaussian();

  /// Child stream keyed off two fresh draws from this stream. Deterministic:
  /// the k-th fork of a given stream is always the same stream.
  RngStream fork();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Zero-mean Gaussian vector with the given covariance, via a symmetric
/// eigen factorization (accepts PSD, not just PD, inputs).
Vector gaussian_vector(const SymmetricPsd& cov, RngStream& rng);

/// Precomputed covariance factor for repeated sampling: cov = L * L^T.
class CovarianceSampler {
 public:
  explicit CovarianceSampler(const SymmetricPsd& cov);

  void sample(RngStream& rng, Vector& out) const;
  Vector sample(RngStream& rng) const;

  const Matrix& factor() const { return L_; }
  Eigen::Index dim() const { return L_.rows(); }

 private:
  Matrix L_;
  mutable Vector z_;
};

}  // namespace lqrpg
