#pragma once

#include <cmath>
#include <cstdint>

namespace mpemba {

/// splitmix64: seeds derived streams; also a decent 64-bit mixer.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ with a cached spare Gaussian (polar Box-Muller).
/// One independent instance per particle; streams are derived from
/// (master seed, particle index) so scheduling cannot affect results.
class ParticleRng {
 public:
  ParticleRng() : ParticleRng(0, 0) {}

  ParticleRng(uint64_t master_seed, uint64_t stream_index) {
    uint64_t sm = master_seed ^ (0xd1342543de82ef95ULL * (stream_index + 1));
    for (auto& word : s_) word = splitmix64(sm);
    has_spare_ = false;
    spare_ = 0.0;
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform in (-1, 1).
  double uniform_symmetric() { return 2.0 * uniform() - 1.0; }

  /// Standard normal via polar Box-Muller with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, r2;
    do {
      u = uniform_symmetric();
      v = uniform_symmetric();
      r2 = u * u + v * v;
    } while (r2 >= 1.0 || r2 == 0.0);
    const double f = std::sqrt(-2.0 * std::log(r2) / r2);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
  double spare_;
  bool has_spare_;
};

}  // namespace mpemba
