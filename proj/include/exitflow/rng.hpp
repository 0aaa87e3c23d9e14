#ifndef EXITFLOW_RNG_HPP
#define EXITFLOW_RNG_HPP

#include <cmath>
#include <cstdint>

namespace exitflow {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ stream, seeded from (master seed, stream index) so that each
// path/chunk owns an independent generator regardless of worker scheduling.
class Rng {
 public:
  Rng(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t sm = master_seed ^ (0x6a09e667f3bcc909ULL * (stream_index + 1));
    for (auto& w : s_) w = splitmix64(sm);
    draws_ = 0;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in (0,1), 53-bit mantissa, never exactly 0
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // standard normal, Box-Muller with pair caching
  double normal() {
    ++draws_;
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  // Knuth's product-of-uniforms method; fine for the moderate rates used here
  long poisson(double lambda) {
    const double limit = std::exp(-lambda);
    long n = 0;
    double prod = uniform();
    while (prod > limit) {
      ++n;
      prod *= uniform();
    }
    return n;
  }

  std::uint64_t normal_draws() const { return draws_; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
  std::uint64_t draws_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace exitflow

#endif
