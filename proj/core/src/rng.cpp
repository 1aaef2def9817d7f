#include "lqrpg/rng.hpp"

#include <cmath>

namespace lqrpg {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_key(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s ^= stream_id;
  std::uint64_t b = splitmix64(s);
  return a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), eng_(mix_key(seed, stream_id)) {}

double RngStream::uniform01() {
  return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::gaussian() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

RngStream RngStream::fork() {
  const std::uint64_t a = eng_();
  const std::uint64_t b = eng_();
  return RngStream(a, b);
}

Vector gaussian_vector(const SymmetricPsd& cov, RngStream& rng) {
  return CovarianceSampler(cov).sample(rng);
}

CovarianceSampler::CovarianceSampler(const SymmetricPsd& cov) {
  const Matrix& m = cov.mat();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success)
    throw NumericError("covariance eigendecomposition failed");
  Vector lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    lam[i] = lam[i] > 0.0 ? std::sqrt(lam[i]) : 0.0;
  L_ = es.eigenvectors() * lam.asDiagonal();
  z_.resize(m.rows());
}

void CovarianceSampler::sample(RngStream& rng, Vector& out) const {
  for (Eigen::Index i = 0; i < z_.size(); ++i) z_[i] = rng.gaussian();
  out.noalias() = L_ * z_;
}

Vector CovarianceSampler::sample(RngStream& rng) const {
  Vector out(L_.rows());
  sample(rng, out);
  return out;
}

}  // namespace lqrpg
