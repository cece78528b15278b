#include "sepctl/primitives.hpp"

#include <cmath>
#include <numbers>

#include "sepctl/errors.hpp"

namespace sepctl {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_standard_normal() {
  // Box-Muller; guard the log against a zero uniform.
  double u1 = next_unit();
  while (u1 <= 0.0) u1 = next_unit();
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::next_gaussian(const Gaussian1D& g) {
  if (g.variance == 0.0) return g.mean;
  return g.mean + std::sqrt(g.variance) * next_standard_normal();
}

std::size_t Rng::next_categorical(const Distribution& d) {
  const double u = next_unit();
  double acc = 0.0;
  const auto& mass = d.mass();
  for (std::size_t i = 0; i + 1 < mass.size(); ++i) {
    acc += mass[i];
    if (u < acc) return i;
  }
  return mass.size() - 1;
}

Rng derive_stream(std::uint64_t seed, std::uint64_t index) {
  // Mix the rollout index through one splitmix round before combining, so
  // consecutive indices land in unrelated regions of the master stream.
  std::uint64_t s = index;
  const std::uint64_t mixed = splitmix64(s);
  return Rng(seed ^ mixed);
}

PrimitiveDraw sample_primitives(const Scenario& s, Rng& rng) {
  PrimitiveDraw d;
  const auto T = static_cast<std::size_t>(s.horizon);
  if (s.family == Family::finite) {
    d.x0 = rng.next_categorical(*s.law.initial);
    d.w.reserve(T);
    for (std::size_t t = 0; t < T; ++t) d.w.push_back(rng.next_categorical(s.law.disturbance[t]));
    d.z.reserve(T + 1);
    for (std::size_t t = 0; t <= T; ++t) d.z.push_back(rng.next_categorical(s.law.noise[t]));
    return d;
  }

  const auto& law = s.law;
  d.x0_real = rng.next_gaussian(law.initial_g);
  d.w_real.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    if (t == 0 && law.initial_disturbance_covariance != 0.0) {
      // W0 | X0 = x is Gaussian with mean shifted along the regression line
      // and variance reduced by the explained part.
      const double vx = law.initial_g.variance;
      require(vx > 0.0, ErrorClass::invariant,
              "sample_primitives: covariance declared with degenerate initial state");
      const double slope = law.initial_disturbance_covariance / vx;
      Gaussian1D cond;
      cond.mean = law.disturbance_g[0].mean + slope * (d.x0_real - law.initial_g.mean);
      cond.variance = law.disturbance_g[0].variance -
                      law.initial_disturbance_covariance * slope;
      require(cond.variance >= -1e-12, ErrorClass::invariant,
              "sample_primitives: conditional variance negative");
      if (cond.variance < 0.0) cond.variance = 0.0;
      d.w_real.push_back(rng.next_gaussian(cond));
    } else {
      d.w_real.push_back(rng.next_gaussian(law.disturbance_g[t]));
    }
  }
  d.z_real.reserve(T + 1);
  for (std::size_t t = 0; t <= T; ++t) d.z_real.push_back(rng.next_gaussian(law.noise_g[t]));
  return d;
}

PrimitiveDraw sample_primitives(const Scenario& s, std::uint64_t seed) {
  Rng rng(seed);
  return sample_primitives(s, rng);
}

}  // namespace sepctl
