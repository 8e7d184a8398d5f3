#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace tor {

/// xoshiro256** generator with its own uniform, normal and exponential
/// transforms so that streams are identical across platforms and libstdc++
/// versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x853c49e6748fea9bULL);

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next(); }

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double normal();
  double exponential();

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_tag(std::string_view tag);

// Seed for stream (root, tag, index). Distinct tags or indices give
// statistically independent streams.
std::uint64_t stream_seed(std::uint64_t root, std::string_view tag, std::uint64_t index);
Rng make_stream(std::uint64_t root, std::string_view tag, std::uint64_t index);

}  // namespace tor
