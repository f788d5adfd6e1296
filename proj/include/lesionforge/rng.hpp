#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace lesionforge {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// FNV-1a; stable across platforms, unlike std::hash.
inline constexpr std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b + 0x632BE59BD9B4E019ull));
}

// Deterministic random stream keyed by (root_seed, stream_id).
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. Distributions are implemented here rather than with the
// <random> distribution templates, whose algorithms are
// implementation-defined, so that draws are identical on every platform.
class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::uint64_t stream_id)
      : root_seed_(root_seed),
        stream_id_(stream_id),
        engine_(hash_combine(root_seed, stream_id)) {}

  std::uint64_t root_seed() const { return root_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Child stream for a named decision site; independent of how much of
  // this stream has already been consumed.
  RngStream derive(std::string_view site) const {
    return {root_seed_, hash_combine(stream_id_, hash_string(site))};
  }
  RngStream derive(std::uint64_t index) const {
    return {root_seed_, hash_combine(stream_id_, splitmix64(index))};
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("uniform: lo > hi");
    return lo + (hi - lo) * uniform01();
  }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("below: empty range");
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  // Unbiased integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::uint64_t root_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace lesionforge
