#pragma once

#include <cstdint>
#include <string_view>

// Counter-based random streams. Every sampled quantity is addressed by a
// (seed, key, counter) triple, so results never depend on call order.
namespace rfb::rng {

constexpr std::uint64_t mix(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix(a ^ mix(b + 0x632be59bd9b4e019ULL));
}

// FNV-1a followed by a finalizer; stable across platforms.
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix(h);
}

constexpr double to_unit(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Uniform in [0, 1) for element `counter` of the stream `stream`.
constexpr double uniform(std::uint64_t stream, std::uint64_t counter) noexcept {
  return to_unit(combine(stream, counter));
}

// Sequential generator over a counter-based stream; satisfies
// UniformRandomBitGenerator so it plugs into <random> distributions.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept { return combine(key_, counter_++); }
  constexpr double uniform() noexcept { return to_unit((*this)()); }
  // Uniform integer in [0, n).
  constexpr std::uint64_t below(std::uint64_t n) noexcept { return n == 0 ? 0 : (*this)() % n; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rfb::rng
