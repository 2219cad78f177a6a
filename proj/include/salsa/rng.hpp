#pragma once

#include <cstdint>
#include <limits>

namespace salsa {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014). Bijective on 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Roles of the independent random streams consumed by one algorithm step.
enum class StreamRole : std::uint64_t {
  RowSketch = 1,
  ColumnSketch = 2,
  FinalSketch = 3,
  Simulation = 4,
  Repetition = 5,
  Outliers = 6,
};

/// Child seed for (seed, step, role, attempt). Depends on nothing else, so
/// streams can be created in any order or on any thread.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t step, StreamRole role,
                                    std::uint64_t attempt = 0) noexcept {
  std::uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ULL);
  h = mix64(h ^ (step * 0xD1B54A32D192ED03ULL + 1));
  h = mix64(h ^ (static_cast<std::uint64_t>(role) * 0x8CB92BA72F3D8DD7ULL));
  return mix64(h ^ (attempt * 0xABC98388FB8FAC03ULL + 7));
}

/// Counter-based generator: the k-th output is mix64(seed + k * gamma) with
/// the golden-ratio increment gamma. Output is identical on every platform.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n) by multiply-shift.
  std::uint64_t uniform_index(std::uint64_t n) noexcept {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>((*this)()) * n) >> 64);
  }

  /// Standard normal by the Box-Muller transform; the second variate of each
  /// pair is cached.
  double normal() noexcept;

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace salsa
