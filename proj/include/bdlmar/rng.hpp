#pragma once

// Seeded random variates.
//
// The engine is Philox4x32-10 (Salmon et al., Random123). A stream is keyed by
// the 64-bit seed; the 128-bit counter holds (block index, stream id), so two
// streams with different ids never share a block. Variate transforms come from
// Boost.Random, whose algorithms are fixed per Boost release, which makes the
// draw sequence reproducible for a given (seed, stream id, Boost version).

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "bdlmar/core_types.hpp"

namespace bdlmar {

/// Philox4x32 with 10 rounds.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// One independent, reproducible random stream. Satisfies
/// UniformRandomBitGenerator with 64-bit output.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (lane_ == 2) refill();
    const result_type v = (static_cast<result_type>(buffer_[2 * lane_]) << 32) | buffer_[2 * lane_ + 1];
    ++lane_;
    return v;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  double uniform01() { return boost::random::uniform_01<double>{}(*this); }
  double normal() { return boost::random::normal_distribution<double>{}(*this); }

 private:
  void refill() {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(stream_id_),
                                  static_cast<std::uint32_t>(stream_id_ >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    buffer_ = Philox4x32::block(ctr, key);
    ++block_;
    lane_ = 0;
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int lane_ = 2;
};

inline Vector standard_normal_vector(Eigen::Index k, RngStream& rng) {
  Vector z(k);
  for (Eigen::Index i = 0; i < k; ++i) z(i) = rng.normal();
  return z;
}

/// Pivot floor used to declare a covariance numerically non-PD.
inline constexpr double kCholeskyPivotTolerance = 1e-10;

/// mean + chol(cov) z.
inline Vector sample_mvn(const Vector& mean, const Matrix& covariance, RngStream& rng) {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size())
    throw DimensionError("covariance shape does not match mean length");
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success) throw NumericError("covariance is not positive definite");
  const Matrix L = llt.matrixL();
  if ((L.diagonal().array().square() <= kCholeskyPivotTolerance).any())
    throw NumericError("covariance is numerically singular");
  return mean + L * standard_normal_vector(mean.size(), rng);
}

/// Draw from N(precision^{-1} shift, scale^2 precision^{-1}) given the lower
/// Cholesky factor of the precision; no explicit inverse is formed.
inline Vector sample_mvn_canonical(const Eigen::LLT<Matrix>& precision_chol, const Vector& shift, double scale,
                                   RngStream& rng) {
  Vector draw = precision_chol.solve(shift);
  const Vector z = standard_normal_vector(shift.size(), rng);
  draw += scale * precision_chol.matrixU().solve(z);
  return draw;
}

/// Inverse gamma with density proportional to x^{-a-1} exp(-b/x).
inline double sample_inverse_gamma(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("inverse-gamma parameters must be positive");
  const double g = boost::random::gamma_distribution<double>(shape, 1.0)(rng);
  return rate / g;
}

/// Uniform on (-a, a).
inline double sample_uniform_sym(double a, RngStream& rng) {
  if (!(a > 0.0)) throw DomainError("uniform half-width must be positive");
  double u;
  do {
    u = rng.uniform01();
  } while (u == 0.0);
  return a * (2.0 * u - 1.0);
}

}  // namespace bdlmar
