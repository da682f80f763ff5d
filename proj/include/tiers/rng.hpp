#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

#include <Eigen/Dense>

namespace tiers {

/// Reproducible random stream keyed by (seed, stream_id).
///
/// The key is mixed with SplitMix64 into the state of a xoshiro256** engine,
/// so streams with different ids are independent for practical purposes and
/// never depend on thread scheduling. Normals use the Box-Muller transform
/// (both outputs consumed), Cauchy draws use tan(pi (U - 1/2)). Nothing here
/// goes through std::*_distribution, whose output is implementation-defined.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double cauchy();

  /// Column-major fill of a matrix, vector or block expression.
  template <class Derived>
  void fill_normal(const Eigen::DenseBase<Derived>& out_const) {
    auto& out = const_cast<Eigen::DenseBase<Derived>&>(out_const);
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = normal();
  }

 private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

RngStream rng_stream(std::uint64_t seed, std::uint64_t stream_id);

/// Hash a seed and a path of indices into a new seed, e.g. (seed, h, rep).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

}  // namespace tiers
