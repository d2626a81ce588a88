#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace nsg {

/// Portable seeded generator: std::mt19937_64 (its output sequence is fixed
/// by the C++ standard) with bounded and unit draws implemented here, since
/// the standard distributions differ across library vendors.
///
/// The stream position is the number of 64-bit words consumed, so a stream
/// can be restored exactly from (seed, draws).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t draws = 0);

  std::uint64_t next_u64();
  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double unit();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t draws() const noexcept { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

/// Independent per-stream seed, e.g. one stream per fragment id.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view stream_name);

}  // namespace nsg
