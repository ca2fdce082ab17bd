#pragma once

#include <cstdint>
#include <string_view>

namespace stochimc {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Counter-based uniform source: the value at any index is a pure function of
// (seed, stream, index), so streams can be split and replayed in any order.
class RandomSource {
 public:
  constexpr RandomSource(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), key_(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}

  constexpr std::uint64_t seed() const { return seed_; }
  constexpr std::uint64_t stream() const { return stream_; }

  constexpr std::uint64_t bits(std::uint64_t index) const {
    return splitmix64(key_ ^ splitmix64(index ^ 0xD1B54A32D192ED03ULL));
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  constexpr double uniform(std::uint64_t index) const {
    return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
  }

  constexpr RandomSource child(std::uint64_t id) const {
    return RandomSource(seed_, splitmix64(stream_ ^ splitmix64(id + 0x2545F4914F6CDD1DULL)));
  }

  constexpr RandomSource child(std::string_view label) const { return child(hash_label(label)); }

  constexpr bool operator==(const RandomSource& other) const {
    return seed_ == other.seed_ && stream_ == other.stream_;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
};

}  // namespace stochimc
