#pragma once

#include <algorithm>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "xladapt/hash.hpp"

namespace xladapt::rng {

// SplitMix64. All randomized steps in the pipeline draw from this so that
// outputs are byte-identical across standard libraries and platforms
// (std::shuffle and the std distributions are implementation-defined).
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derive an independent stream seed from a parent seed and a tag.
inline uint64_t derive(uint64_t seed, uint64_t tag) {
  uint64_t s = seed ^ (0x9E3779B97F4A7C15ULL + (tag << 1));
  uint64_t a = splitmix64(s);
  s ^= tag;
  return a ^ splitmix64(s);
}

inline uint64_t derive(uint64_t seed, std::string_view tag) {
  return derive(seed, hash::fnv1a64(tag));
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // (0, 1), never hits either endpoint
  double next_double_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }
  double uniform_open(double lo, double hi) { return lo + (hi - lo) * next_double_open(); }

  // Unbiased draw in [0, n); n must be > 0.
  uint64_t below(uint64_t n) {
    uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  // Fisher-Yates
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices out of [0, n), returned in ascending order.
  std::vector<size_t> sample_indices(size_t n, size_t k);

 private:
  uint64_t state_;
};

inline std::vector<size_t> Rng::sample_indices(size_t n, size_t k) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  if (k > n) k = n;
  // partial Fisher-Yates: the first k slots end up uniform without replacement
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + static_cast<size_t>(below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace xladapt::rng
