#pragma once

#include <cstdint>
#include <random>

namespace cgw {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-replicate random stream.
///
/// The engine state for replicate r is a pure function of (master seed, r):
/// the pair is hashed through a SplitMix64 counter chain and fed to a
/// seed_seq, so replicate r sees the same numbers no matter which worker
/// runs it or in which order.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t replicate)
      : master_seed_(master_seed), replicate_(replicate) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t replicate() const { return replicate_; }

  Rng engine() const {
    const std::uint64_t key = splitmix64(master_seed_);
    std::uint64_t counter = splitmix64(key ^ splitmix64(replicate_ + 0x632be59bd9b4e019ULL));
    std::uint32_t words[8];
    for (auto& w : words) {
      counter = splitmix64(counter);
      w = static_cast<std::uint32_t>(counter >> 32);
    }
    std::seed_seq seq(std::begin(words), std::end(words));
    return Rng(seq);
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t replicate_;
};

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace cgw
