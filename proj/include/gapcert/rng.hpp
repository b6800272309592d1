#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace gapcert {

// Philox 4x32-10 counter-based generator. Outputs are a pure function of
// (key, counter), so parallel sampling is reproducible regardless of
// evaluation order.
namespace philox {

constexpr uint32_t kMultA = 0xD2511F53u;
constexpr uint32_t kMultB = 0xCD9E8D57u;
constexpr uint32_t kWeylA = 0x9E3779B9u;
constexpr uint32_t kWeylB = 0xBB67AE85u;

inline std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const uint64_t p0 = static_cast<uint64_t>(kMultA) * ctr[0];
    const uint64_t p1 = static_cast<uint64_t>(kMultB) * ctr[2];
    const std::array<uint32_t, 4> nxt{
        static_cast<uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
        static_cast<uint32_t>(p1),
        static_cast<uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
        static_cast<uint32_t>(p0),
    };
    ctr = nxt;
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

} // namespace philox

namespace detail {

// Standard normal quantile: Acklam's rational approximation polished by one
// Halley step against erfc, giving close to full double precision.
inline double inv_norm_cdf(double p) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  const double err = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = err * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

} // namespace detail

// 53-bit uniform in the open interval (0,1), from counter (index, slot)
// under the given seed.
inline double uniform_draw(uint64_t seed, uint64_t index, uint32_t slot) {
  const std::array<uint32_t, 2> key{static_cast<uint32_t>(seed),
                                    static_cast<uint32_t>(seed >> 32)};
  const std::array<uint32_t, 4> ctr{static_cast<uint32_t>(index),
                                    static_cast<uint32_t>(index >> 32), slot, 0u};
  const auto out = philox::block(ctr, key);
  const uint64_t mant =
      (static_cast<uint64_t>(out[0] >> 6) << 27) | static_cast<uint64_t>(out[1] >> 5);
  return (static_cast<double>(mant) + 0.5) * (1.0 / 9007199254740992.0);
}

// Standard normal draw by inverse-CDF on the counter stream.
inline double normal_draw(uint64_t seed, uint64_t index, uint32_t slot) {
  return detail::inv_norm_cdf(uniform_draw(seed, index, slot));
}

} // namespace gapcert
