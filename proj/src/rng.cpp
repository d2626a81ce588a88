#include "nsg/rng.hpp"

#include <cassert>

namespace nsg {

Rng::Rng(std::uint64_t seed, std::uint64_t draws) : engine_(seed), seed_(seed), draws_(draws) {
  engine_.discard(draws);
}

std::uint64_t Rng::next_u64() {
  ++draws_;
  return engine_();
}

std::uint64_t Rng::below(std::uint64_t bound) {
  assert(bound > 0);
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  std::uint64_t x = next_u64();
  while (x > limit) x = next_u64();
  return x % bound;
}

double Rng::unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view stream_name) {
  return splitmix64(seed ^ fnv1a64(stream_name));
}

}  // namespace nsg
