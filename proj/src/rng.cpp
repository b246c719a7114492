#include "glshrink/rng.hpp"

#include <bit>

namespace glshrink {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
  z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
  return z ^ (z >> 33);
}

std::uint64_t mix_stafford13(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Odd increment with enough bit transitions for a good Weyl sequence.
std::uint64_t mix_gamma(std::uint64_t z) {
  z = mix64(z) | 1ULL;
  if (std::popcount(z ^ (z >> 1)) < 24) z ^= 0xaaaaaaaaaaaaaaaaULL;
  return z;
}

}  // namespace

Stream::Stream(std::uint64_t key_hi, std::uint64_t key_lo)
    : state_(mix_stafford13(key_lo ^ mix64(key_hi))), gamma_(mix_gamma(key_hi ^ std::rotl(key_lo, 29))) {}

Stream::result_type Stream::operator()() {
  state_ += gamma_;
  return mix_stafford13(state_);
}

double Stream::uniform() {
  // 53 random bits, shifted by half an ulp so 0 and 1 are excluded.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal() { return normal_(*this); }

std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Stream derive_stream(std::uint64_t master_seed, std::uint64_t replicate_index, std::string_view label) {
  const std::uint64_t lh = mix64(hash_label(label));
  const std::uint64_t hi = mix64(master_seed ^ 0x9e3779b97f4a7c15ULL) ^ lh;
  const std::uint64_t lo = mix_stafford13(replicate_index + mix64(lh ^ master_seed));
  return Stream(hi, lo);
}

}  // namespace glshrink
