#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace batchts {

namespace detail {

/* Philox4x32-10 block cipher (Salmon et al., "Parallel random numbers:
 * as easy as 1, 2, 3").  Counter-based: the stream is a pure function of
 * (key, counter), so draws are reproducible bit for bit no matter how work
 * is scheduled across threads. */
struct philox4x32 {
  static constexpr std::uint32_t mult0 = 0xD2511F53u;
  static constexpr std::uint32_t mult1 = 0xCD9E8D57u;
  static constexpr std::uint32_t weyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t weyl1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t(mult0) * ctr[0];
      const std::uint64_t p1 = std::uint64_t(mult1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
      key[0] += weyl0;
      key[1] += weyl1;
    }
    return ctr;
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

/* One logical random stream, keyed by (master_seed, replicate, purpose).
 *
 * Streams with distinct (replicate, purpose) occupy disjoint counter ranges
 * of the same cipher, so they never overlap and can be created lazily in any
 * order.  Rewards, posterior sampling, and Monte Carlo probability estimates
 * each get their own purpose so that changing one consumer (say, the number
 * of Monte Carlo samples) cannot shift the draws seen by another. */
class RngStream {
 public:
  enum class Purpose : std::uint32_t {
    rewards = 1,
    thompson = 2,
    monte_carlo = 3,
  };

  RngStream(std::uint64_t master_seed, std::uint32_t replicate, Purpose purpose)
      : replicate_(replicate), purpose_(static_cast<std::uint32_t>(purpose)) {
    const std::uint64_t k = detail::splitmix64(master_seed);
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  std::uint64_t next_u64() {
    if (buffered_ == 0) refill();
    return buffer_[--buffered_];
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; draws come out in pairs.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  void refill() {
    const std::array<std::uint32_t, 4> out = detail::philox4x32::block(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
         replicate_, purpose_},
        key_);
    ++block_;
    buffer_[1] = (std::uint64_t(out[1]) << 32) | out[0];
    buffer_[0] = (std::uint64_t(out[3]) << 32) | out[2];
    buffered_ = 2;
  }

  std::array<std::uint32_t, 2> key_{};
  std::uint32_t replicate_;
  std::uint32_t purpose_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace batchts
