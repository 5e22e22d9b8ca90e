#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Core>

namespace hsac {

// xoshiro256++ with splitmix64 seed expansion. Every stochastic choice in the
// project goes through this generator so runs are reproducible bit-for-bit
// from an explicit seed, independent of the platform's <random> internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform in {0, ..., n-1}, n >= 1.
  int uniform_int(int n);

  // Standard normal via Box-Muller. Not cached: each call consumes exactly
  // two uniforms, which keeps draw counts easy to mirror across
  // implementations that must stay in lockstep.
  double normal();

  Eigen::VectorXd normal_vector(int n);
  // Row-major fill order.
  Eigen::MatrixXd normal_matrix(int rows, int cols);

  // Derive an independent stream. Forking does not advance this generator.
  Rng fork(std::uint64_t salt) const;

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

// Stable 64-bit FNV-1a, used for config digests and name-derived seeds.
std::uint64_t fnv1a64(std::string_view bytes);

// Seed for a named substream of a run: hash of (master seed, tag, counter).
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t tag,
                          std::uint64_t counter);

}  // namespace hsac
