#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace phi4lab {

// Philox4x32-10 (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k[0] += W0;
      k[1] += W1;
    }
    const std::uint64_t p0 = std::uint64_t(M0) * c[0];
    const std::uint64_t p1 = std::uint64_t(M1) * c[2];
    c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ c[3] ^ k[1],
         std::uint32_t(p0)};
  }
  return c;
}

// Uniform in (0, 1] with 53 random bits.
inline double philox_uniform(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t(hi >> 5) << 26) | (lo >> 6);
  return (double(bits) + 1.0) * 0x1.0p-53;
}

// Two independent standard normals from one block (Box-Muller).
inline std::array<double, 2> philox_normal_pair(const PhiloxCounter& ctr, const PhiloxKey& key) {
  const PhiloxCounter r = philox4x32(ctr, key);
  const double u1 = philox_uniform(r[0], r[1]);
  const double u2 = philox_uniform(r[2], r[3]);
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * 3.14159265358979323846 * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

}  // namespace phi4lab
