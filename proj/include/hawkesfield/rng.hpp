#pragma once

#include <cmath>
#include <cstdint>

namespace hawkesfield {

// SplitMix64 finalizer; used to hash stream keys into generator state.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t s = a ^ (b * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
  return splitmix64(s);
}

// Identifies one random stream. Replication r, neuron i and lane l derive a
// stream deterministically from the master seed; streams with different keys
// are statistically independent. Lanes separate the several point sets that
// one neuron needs (e.g. the two layers of the coupled construction).
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::uint64_t index = 0;
  std::uint64_t lane = 0;
};

// Reserved `index` values for streams not attached to a neuron.
inline constexpr std::uint64_t kNetworkStream = ~0ULL;
inline constexpr std::uint64_t kPositionStream = ~0ULL - 1;

// Lanes used by the per-neuron streams.
inline constexpr std::uint64_t kLaneLimitLayer = 0;
inline constexpr std::uint64_t kLaneExcessLayer = 1;

// xoshiro256** seeded from a hashed StreamKey.
class Stream {
 public:
  explicit Stream(const StreamKey& key) noexcept {
    std::uint64_t h = mix_key(key.seed, 0x5EEDULL);
    h = mix_key(h, key.replication);
    h = mix_key(h, key.index);
    h = mix_key(h, key.lane);
    for (auto& s : s_) s = splitmix64(h);
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1].
  double uniform_open0() noexcept { return 1.0 - uniform(); }

  double exponential(double rate) noexcept {
    return -std::log(uniform_open0()) / rate;
  }

  double normal() noexcept {
    // Box-Muller; one value per call keeps the draw count per variate fixed.
    const double u1 = uniform_open0();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4]{};
};

}  // namespace hawkesfield
