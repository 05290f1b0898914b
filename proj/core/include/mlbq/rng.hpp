#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace mlbq {

// Streams are std::mt19937_64 seeded from splitmix64 hashes of (master seed, stream ids).
inline constexpr std::string_view kRngScheme = "mt19937_64/splitmix64-v1";

std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // 53-bit uniform in [0, 1).
  double uniform();
  // 53-bit uniform in (0, 1).
  double uniform_open();
  double normal();
  std::uint64_t next() { return engine_(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace mlbq
