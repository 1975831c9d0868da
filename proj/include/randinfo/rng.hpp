#pragma once

#include <cstdint>
#include <random>

namespace randinfo {

// Trial streams are derived from (master seed, stream id) by a fixed 64-bit
// mixing function, so results never depend on execution order or thread count.

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of stream `stream` under `master`: splitmix64(master ^ splitmix64(stream)).
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(master ^ splitmix64(stream));
}

using Engine = std::mt19937_64;

/// Generator for one independent stream, together with the record needed to replay it.
struct RngStream {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;
  Engine engine;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : master(master_seed), stream(stream_id), engine(stream_seed(master_seed, stream_id)) {}

  double uniform() { return uniform_dist(engine); }
  double normal() { return normal_dist(engine); }

 private:
  std::uniform_real_distribution<double> uniform_dist{0.0, 1.0};
  std::normal_distribution<double> normal_dist{0.0, 1.0};
};

}  // namespace randinfo
