#pragma once

#include <cstdint>
#include <vector>

#include "sepctl/scenario.hpp"

namespace sepctl {

// Deterministic 64-bit stream generator (splitmix64).  Every random quantity
// in the library is derived from a master seed through named substreams, so a
// given (scenario, seed) pair reproduces byte-identical runs regardless of
// thread scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double next_unit();  // uniform on [0, 1) with 53 random bits

  // Standard normal via Box-Muller on explicit uniforms; no library
  // distribution is involved, so streams are stable across platforms.
  double next_standard_normal();
  double next_gaussian(const Gaussian1D& g);

  // Inverse-CDF draw; consumes exactly one uniform.
  std::size_t next_categorical(const Distribution& d);

 private:
  std::uint64_t state_;
};

// Independent substream for rollout `index` of master seed `seed`.
Rng derive_stream(std::uint64_t seed, std::uint64_t index);

// One realization of the primitive randomness of a scenario: the initial
// state, disturbances w_t for t = 0..T-1, and observation noises z_t for
// t = 0..T.  Exactly one of the index/real column sets is populated,
// according to the scenario family.
struct PrimitiveDraw {
  std::size_t x0 = 0;
  std::vector<std::size_t> w;
  std::vector<std::size_t> z;

  double x0_real = 0.0;
  std::vector<double> w_real;
  std::vector<double> z_real;
};

// Samples (X0, W_{0:T-1}, Z_{0:T}) from the declared law.  For the Gaussian
// family, X0 and W0 honor the declared covariance (W0 is drawn from its
// conditional law given X0); later disturbances and all noises are
// independent.
PrimitiveDraw sample_primitives(const Scenario& s, Rng& rng);
PrimitiveDraw sample_primitives(const Scenario& s, std::uint64_t seed);

}  // namespace sepctl
