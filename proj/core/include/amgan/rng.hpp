#pragma once

// Counter-based random numbers (Philox4x64-10). A stream is addressed by
// (seed, purpose, a, b): the seed and a hashed purpose tag form the key, the
// coordinates a and b pick the counter range. Two streams with different
// addresses never share a block, so every consumer can be reproduced without
// replaying the others.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>

namespace amgan {

inline constexpr std::string_view kRngAlgorithm = "philox4x64-10";

struct Philox4x64 {
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;
};

// FNV-1a; turns a purpose name into the second key word.
constexpr std::uint64_t purpose_id(std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::string_view purpose, std::uint64_t a = 0,
               std::uint64_t b = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept { return next_u64(); }

  std::uint64_t next_u64() noexcept;
  // [0, 1) with 53 random bits.
  double uniform() noexcept;
  // Standard normal via Box-Muller.
  double normal() noexcept;
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  void refill() noexcept;

  Philox4x64::Key key_;
  std::uint64_t a_, b_;
  std::uint64_t block_index_ = 0;
  Philox4x64::Counter buffer_{};
  std::size_t used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace amgan
