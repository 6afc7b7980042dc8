#ifndef CORRSIFT_RNG_HPP
#define CORRSIFT_RNG_HPP

#include <cmath>
#include <cstdint>

namespace corrsift {

// Splittable stream of random numbers keyed by (seed, stream id).
//
// The generator is xoshiro256++ with its four state words produced by a
// SplitMix64 chain over the seed and stream id, so identical (seed, stream)
// pairs reproduce identical draws bit-for-bit on any platform. Gaussian
// variates use Box-Muller and gamma variates Marsaglia-Tsang, both built
// only on the uniform output, so the full draw sequence is reproducible.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed ^ (stream * 0x9E3779B97F4A7C15ULL);
    for (auto& word : state_) word = split_mix64(x);
    // Avoid the all-zero state (seed == 0, stream == 0 cannot produce it
    // because split_mix64 advances x before mixing, but keep the guard).
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1), never exactly zero.
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  // Gamma(shape, scale 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform_open();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // chi random variable with k degrees of freedom (k > 0, possibly non-integer).
  double chi(double k) { return std::sqrt(2.0 * gamma(0.5 * k)); }

  double chi_squared(double k) { return 2.0 * gamma(0.5 * k); }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  static std::uint64_t split_mix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace corrsift

#endif  // CORRSIFT_RNG_HPP
