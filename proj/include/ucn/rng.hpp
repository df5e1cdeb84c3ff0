#pragma once

// Deterministic random streams for the simulator and optimizers.
//
// Core generator: xoshiro256++ (Blackman & Vigna), seeded by expanding a
// 64-bit key with the splitmix64 finalizer. Sub-streams are derived from a
// parent key by hashing a stage tag (FNV-1a 64) together with up to three
// indices, so the same (seed, tag, indices) tuple yields the same stream in
// any run, any thread, and any language that implements the same generators.
// Distributions are implemented here rather than taken from <random> because
// the standard leaves their algorithms unspecified.

#include <cstdint>
#include <string_view>
#include <vector>

namespace ucn {

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64_next(std::uint64_t& state);

// Combines a parent key, a tag, and indices into a child key.
std::uint64_t derive_key(std::uint64_t parent, std::string_view tag,
                         std::uint64_t i0 = 0, std::uint64_t i1 = 0,
                         std::uint64_t i2 = 0);

class RngStream {
 public:
  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t key);

  // Child stream keyed off this stream's identity; independent of how much
  // of the parent stream has been consumed.
  RngStream derive(std::string_view tag, std::uint64_t i0 = 0,
                   std::uint64_t i1 = 0, std::uint64_t i2 = 0) const;

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64();
  // Uniform in [0, 1), 53-bit resolution.
  double next_double();
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller (cosine branch); consumes two uniforms.
  double normal();
  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  std::int64_t poisson(double mean);
  // Fisher-Yates permutation of 0..n-1.
  std::vector<std::uint32_t> permutation(std::uint32_t n);

 private:
  std::uint64_t key_;
  std::uint64_t s_[4];
};

}  // namespace ucn
