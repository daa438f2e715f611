// Counter-based random numbers: a Philox4x32-10 block cipher and the
// standard complex Gaussian draw built on it.  Every draw is a pure function
// of (seed, sample index, coefficient index), so results are identical under
// any parallel schedule.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace zvar {

namespace detail {
inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;
}  // namespace detail

// One Philox4x32 block, 10 rounds (the reference parameterization).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += detail::kPhiloxW0;
      key[1] += detail::kPhiloxW1;
    }
    const std::uint64_t p0 =
        static_cast<std::uint64_t>(detail::kPhiloxM0) * ctr[0];
    const std::uint64_t p1 =
        static_cast<std::uint64_t>(detail::kPhiloxM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

// Standard complex Gaussian (density e^{-|c|^2}/pi, so E|c|^2 = 1) at the
// logical coordinates (seed, sample index, coefficient index).  The seed
// keys the cipher and the two indices fill separate counter words, so
// distinct coordinates can never collide.
inline std::complex<double> gaussian_draw(std::uint64_t seed,
                                          std::uint64_t index,
                                          std::uint32_t coeff) {
  const std::array<std::uint32_t, 2> key{
      static_cast<std::uint32_t>(seed),
      static_cast<std::uint32_t>(seed >> 32)};
  const std::array<std::uint32_t, 4> ctr{
      coeff, 0u, static_cast<std::uint32_t>(index),
      static_cast<std::uint32_t>(index >> 32)};
  const auto r = philox4x32(ctr, key);

  const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
  // u1 in (0,1] keeps the log finite; u2 in [0,1).
  const double u1 = static_cast<double>((a >> 11) + 1) * 0x1p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1p-53;
  const double radius = std::sqrt(-std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace zvar
