#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace paddy {

/// Deterministic random source with a small, explicitly serializable state.
///
/// The generator is xoshiro256** (Blackman & Vigna, public domain) seeded
/// through splitmix64. Normal deviates use Box-Muller built from fresh 64-bit
/// words and keep no cached spare, so the four state words below are the
/// complete generator state: saving them mid-run and restoring later replays
/// the remaining stream bit for bit. Trial documents record the algorithm
/// name and version so a replay against a different generator is detectable.
class Rng {
public:
  using State = std::array<std::uint64_t, 4>;

  static constexpr const char* algorithm_name = "xoshiro256starstar-boxmuller";
  static constexpr int algorithm_version = 1;

  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  static Rng from_state(const State& s) {
    Rng r;
    r.state_ = s;
    return r;
  }

  const State& state() const { return state_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), n > 0. Debiased via Lemire's method, so the
  /// number of words consumed can vary but is a pure function of the state.
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Normal deviate, Box-Muller form; consumes exactly two words.
  double normal(double mean, double sigma) {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * mag * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  Rng() = default;

  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  State state_{};
};

}  // namespace paddy
