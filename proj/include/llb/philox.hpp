// Philox4x32-10 counter-based generator. Pure functions of (key, counter),
// so noise increments can be generated in any order, from any thread, and
// always reproduce bit-for-bit. Constants follow the published algorithm.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace llb {

namespace detail {
inline constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
inline constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0,
                         std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM4x32A) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM4x32B) * c[2];
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0), hi0 = p0 >> 32;
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1), hi1 = p1 >> 32;
  c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}
}  // namespace detail

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::uint32_t k0, std::uint32_t k1) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k0 += detail::kPhiloxW32A;
      k1 += detail::kPhiloxW32B;
    }
    detail::philox_round(ctr, k0, k1);
  }
  return ctr;
}

// Two independent 64-bit words for key (seed) and counter (stream, step).
inline std::array<std::uint64_t, 2> philox_u64x2(std::uint64_t seed,
                                                 std::uint64_t stream,
                                                 std::uint64_t step) {
  const auto w = philox4x32(
      {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32),
       static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32));
  return {static_cast<std::uint64_t>(w[0]) | (static_cast<std::uint64_t>(w[1]) << 32),
          static_cast<std::uint64_t>(w[2]) | (static_cast<std::uint64_t>(w[3]) << 32)};
}

inline std::uint64_t philox_u64(std::uint64_t seed, std::uint64_t stream,
                                std::uint64_t step) {
  return philox_u64x2(seed, stream, step)[0];
}

// One standard normal per (seed, stream, step): Box-Muller cosine branch on
// two 53-bit uniforms strictly inside (0, 1).
inline double philox_normal(std::uint64_t seed, std::uint64_t stream,
                            std::uint64_t step) {
  const auto w = philox_u64x2(seed, stream, step);
  const double u1 = (static_cast<double>(w[0] >> 11) + 0.5) * 0x1p-53;
  const double u2 = (static_cast<double>(w[1] >> 11) + 0.5) * 0x1p-53;
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace llb
