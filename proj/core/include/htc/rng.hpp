#pragma once

#include <cstdint>

namespace htc {

/// Counter-based SplitMix64 stream. The n-th draw is a pure function of
/// (seed, n), so any element of a disorder realization can be regenerated
/// without replaying the stream, and results are identical on every
/// platform (no std:: distributions are involved).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t at(std::uint64_t counter) const;

  std::uint64_t next() { return at(counter_++); }

  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform_open();

  /// Standard normal via Box-Muller; consumes two counters per pair.
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace htc
