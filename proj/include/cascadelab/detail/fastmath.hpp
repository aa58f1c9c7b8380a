#pragma once

// Branch-free elementary functions used inside simd loops. They are plain
// inline code so that the scalar and vectorized instantiations round
// identically (the build disables floating-point contraction).

#include <bit>
#include <cmath>
#include <cstdint>

namespace cascadelab::detail {

inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kLog2e = 1.4426950408889634074;
inline constexpr double kSqrtHalf = 0.70710678118654752440;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kHalfPi = 1.57079632679489661923;

/// Natural log for finite x > 0 in the normal range.
inline double fast_log(double x) noexcept {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  std::int64_t e = static_cast<std::int64_t>(bits >> 52) - 1023;
  double m = std::bit_cast<double>((bits & 0x000FFFFFFFFFFFFFull) | 0x3FF0000000000000ull);
  const bool big = m > kSqrt2;
  m = big ? m * 0.5 : m;
  e += big ? 1 : 0;
  const double s = (m - 1.0) / (m + 1.0);
  const double z = s * s;
  double p = 1.0 / 21.0;
  p = p * z + 1.0 / 19.0;
  p = p * z + 1.0 / 17.0;
  p = p * z + 1.0 / 15.0;
  p = p * z + 1.0 / 13.0;
  p = p * z + 1.0 / 11.0;
  p = p * z + 1.0 / 9.0;
  p = p * z + 1.0 / 7.0;
  p = p * z + 1.0 / 5.0;
  p = p * z + 1.0 / 3.0;
  const double ed = static_cast<double>(e);
  const double tail = 2.0 * s * z * p;
  return ed * kLn2Hi + (2.0 * s + (tail + ed * kLn2Lo));
}

/// e^x. Saturates to +inf above ~709.8 and flushes to 0 (through the
/// subnormals) below ~-745.
inline double fast_exp(double x) noexcept {
  x = x > 1400.0 ? 1400.0 : x;
  x = x < -1400.0 ? -1400.0 : x;
  const double k = std::floor(x * kLog2e + 0.5);
  const double r = (x - k * kLn2Hi) - k * kLn2Lo;
  double p = 1.0 / 6227020800.0;  // 1/13!
  p = p * r + 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const std::int64_t ki = static_cast<std::int64_t>(k);
  const std::int64_t k1 = ki / 2;
  const std::int64_t k2 = ki - k1;
  const double s1 = std::bit_cast<double>(static_cast<std::uint64_t>(k1 + 1023) << 52);
  const double s2 = std::bit_cast<double>(static_cast<std::uint64_t>(k2 + 1023) << 52);
  return p * s1 * s2;
}

/// Cosine and sine of a uniformly distributed angle driven by u in [0, 1).
/// The angle used is q·π/2 + a with q = floor(4u) and a centred in its
/// quadrant; it is uniform on the circle, though shifted from 2πu by π/4.
inline void uniform_angle_cos_sin(double u, double& c, double& s) noexcept {
  const double t = 4.0 * u;
  const std::int64_t q = static_cast<std::int64_t>(t);
  const double a = (t - static_cast<double>(q) - 0.5) * kHalfPi;
  const double z = a * a;
  double sp = -1.0 / 355687428096000.0;  // -1/17!
  sp = sp * z + 1.0 / 1307674368000.0;
  sp = sp * z - 1.0 / 6227020800.0;
  sp = sp * z + 1.0 / 39916800.0;
  sp = sp * z - 1.0 / 362880.0;
  sp = sp * z + 1.0 / 5040.0;
  sp = sp * z - 1.0 / 120.0;
  sp = sp * z + 1.0 / 6.0;
  const double sa = a - a * z * sp;
  double cp = 1.0 / 6402373705728000.0;  // 1/18!
  cp = cp * z - 1.0 / 20922789888000.0;
  cp = cp * z + 1.0 / 87178291200.0;
  cp = cp * z - 1.0 / 479001600.0;
  cp = cp * z + 1.0 / 3628800.0;
  cp = cp * z - 1.0 / 40320.0;
  cp = cp * z + 1.0 / 720.0;
  cp = cp * z - 1.0 / 24.0;
  cp = cp * z + 0.5;
  const double ca = 1.0 - z * cp;
  const bool odd = (q & 1) != 0;
  const bool neg_c = q == 1 || q == 2;
  const bool neg_s = q >= 2;
  const double c0 = odd ? sa : ca;
  const double s0 = odd ? ca : sa;
  c = neg_c ? -c0 : c0;
  s = neg_s ? -s0 : s0;
}

}  // namespace cascadelab::detail
