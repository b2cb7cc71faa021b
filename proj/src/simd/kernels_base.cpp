#include "gwsi/simd.hpp"

#include <cfloat>
#include <cmath>

namespace gwsi::simd::base {

void neg_plogp(std::span<const double> p, std::span<double> out) noexcept {
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double v = p[i];
    // Subnormal masses contribute below 1e-300 bits; treat them as zero.
    out[i] = v >= DBL_MIN ? -v * std::log2(v) : 0.0;
  }
}

double sum(std::span<const double> p) noexcept {
  double acc = 0.0;
  for (double v : p) acc += v;
  return acc;
}

void scale(std::span<const double> src, double factor, std::span<double> dst) noexcept {
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = factor * src[i];
}

bool counts_typical(std::span<const std::uint32_t> counts, std::span<const double> probs,
                    std::uint32_t n, double eps) noexcept {
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double p = probs[i];
    const double c = static_cast<double>(counts[i]);
    if (p == 0.0) {
      if (counts[i] != 0) return false;
      continue;
    }
    if (std::fabs(c / dn - p) > eps * p) return false;
  }
  return true;
}

}  // namespace gwsi::simd::base
