#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace glshrink {

/// Counter-based random stream. Each stream walks its own Weyl sequence
/// (state += gamma, gamma odd and stream-specific) through a 64-bit
/// finalizer, so streams derived from different keys do not share a
/// sequence. Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t key_hi, std::uint64_t key_lo);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();

 private:
  std::uint64_t state_;
  std::uint64_t gamma_;
  std::normal_distribution<double> normal_;
};

/// Deterministic stream for (master seed, replicate, label). Equal inputs
/// give equal streams; any change in an input gives an unrelated stream.
Stream derive_stream(std::uint64_t master_seed, std::uint64_t replicate_index, std::string_view label);

std::uint64_t hash_label(std::string_view label);

}  // namespace glshrink
