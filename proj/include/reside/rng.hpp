#pragma once

// Self-contained random streams. The standard <random> distributions are not
// bit-specified across library implementations, so every draw here is done
// with fixed integer/floating arithmetic: identical seeds give identical
// streams on any conforming platform.

#include <cstdint>
#include <cmath>
#include <cstddef>
#include <vector>

namespace reside {

// splitmix64 finalizer; also used to expand seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Named substreams so that every consumer of randomness draws from its own
// independent generator regardless of evaluation order.
enum class Stream : std::uint64_t {
  generic = 0,
  noise = 1,
  patches = 2,
  net_init = 3,
  shuffle = 4,
  mask = 5,
  measurement = 6,
  power_iter = 7,
};

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t step, Stream stream) {
  std::uint64_t h = mix64(master ^ 0x5851f42d4c957f2dull);
  h = mix64(h ^ step);
  h = mix64(h ^ (static_cast<std::uint64_t>(stream) << 32));
  return h;
}

// xoshiro256++ core with splitmix64 seeding.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) {
      sm += 0x9e3779b97f4a7c15ull;
      std::uint64_t z = sm;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      word = z ^ (z >> 31);
    }
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

  // [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; draws are consumed in pairs.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Unbiased integer in [0, n); Lemire's multiply-shift with rejection.
  std::uint64_t uniform_index(std::uint64_t n) {
    __extension__ typedef unsigned __int128 u128;
    std::uint64_t x = next_u64();
    u128 m = static_cast<u128>(x) * n;
    std::uint64_t low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<u128>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace reside
