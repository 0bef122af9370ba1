#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "vwnn/errors.hpp"
#include "vwnn/tensor.hpp"

namespace vwnn {

namespace detail {

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Deterministic random stream keyed by (seed, label).
///
/// Streams with different labels are seeded independently, so the sequence a
/// consumer sees never depends on how many draws other consumers made. The
/// engine is mt19937_64, whose output is fixed by the standard; doubles are
/// built from its top 53 bits rather than through std::uniform_real_distribution,
/// whose algorithm is implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string label)
      : seed_(seed), label_(std::move(label)), engine_(detail::splitmix64(seed ^ detail::fnv1a(label_))) {}

  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& label() const noexcept { return label_; }

  /// Independent stream whose label is `label() + "/" + sub`.
  RngStream child(std::string_view sub) const { return RngStream(seed_, label_ + "/" + std::string(sub)); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw ArgumentError("next_below: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Fisher-Yates shuffle driven by this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::string label_;
  std::mt19937_64 engine_;
};

/// n draws uniform in [lo, hi).
inline Tensor rng_uniform(RngStream& stream, double lo, double hi, std::size_t n) {
  if (!(lo < hi)) throw ArgumentError("rng_uniform: require lo < hi");
  if (n == 0) throw ArgumentError("rng_uniform: n must be positive");
  Tensor out({n});
  for (std::size_t i = 0; i < n; ++i) {
    double x = lo + (hi - lo) * stream.next_unit();
    // Rounding in the affine map can land exactly on hi.
    if (x >= hi) x = std::nextafter(hi, lo);
    out[i] = x;
  }
  return out;
}

}  // namespace vwnn
