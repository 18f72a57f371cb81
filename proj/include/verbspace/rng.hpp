#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace verbspace {

/// FNV-1a over a byte range; used for stream derivation and content fingerprints.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Deterministic random stream derived from (seed, name).
///
/// Every consumer of randomness owns a named stream (e.g. "init/heads",
/// "shuffle/epoch-3"), so reordering one consumer never perturbs another.
/// The engine is std::mt19937_64 (fully specified by the standard); the
/// uniform/normal transforms below are hand-rolled so that draws are
/// bit-identical across standard library implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view name)
      : engine_(fnv1a64(name, fnv1a64(std::string_view(
                                  reinterpret_cast<const char*>(&seed),
                                  sizeof(seed))))) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). Modulo bias is negligible for n << 2^64.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  /// Standard normal via Box-Muller (cosine branch only, so one draw
  /// consumes exactly two engine outputs).
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace verbspace
