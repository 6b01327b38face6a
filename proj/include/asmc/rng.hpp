#ifndef ASMC_RNG_HPP
#define ASMC_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>

namespace asmc {

/// Identifies one independent random stream. Every particle at every level
/// owns its own stream, so results do not depend on how work is scheduled.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint32_t level = 0;
  std::uint32_t particle = 0;
};

/// Stream index reserved for the resampling draws of a level.
inline constexpr std::uint32_t kResampleStream = std::numeric_limits<std::uint32_t>::max();

/// One Philox4x32-10 block: encrypts `counter` under `key`.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The key is derived from the seed; the 128-bit counter is
/// (block_lo, block_hi, level, particle). Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(const StreamKey& key) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// Standard normal variates by the polar method, drawing from a StreamRng.
/// The sequence does not depend on the standard library implementation.
class NormalSource {
 public:
  explicit NormalSource(const StreamKey& key) noexcept : rng_(key) {}

  double operator()() noexcept;
  double uniform() noexcept { return rng_.uniform(); }

 private:
  StreamRng rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace asmc

#endif  // ASMC_RNG_HPP
