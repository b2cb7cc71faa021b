#pragma once

// Data-parallel inner loops shared by the information measures and the codec.
//
// Every kernel has a portable reference implementation in `simd::base` and,
// where the build and the host allow it, a vectorised implementation in
// `simd::avx2`. The free functions in `simd` forward to whichever variant was
// selected at start-up; the selection can be pinned with the GWSI_SIMD
// environment variable ("base" or "avx2") or with `force_isa`.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace gwsi::simd {

enum class Isa { base, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// True when the variant was compiled in and the running CPU supports it.
bool isa_available(Isa isa) noexcept;

Isa active_isa() noexcept;

/// Pins the dispatch table. Throws std::invalid_argument if `isa` is unavailable.
void force_isa(Isa isa);

/// out[i] = -p[i]*log2(p[i]), with 0 for p[i] below DBL_MIN (so 0*log2(0) = 0).
/// `out` has the length of `p` and may alias it.
void neg_plogp(std::span<const double> p, std::span<double> out) noexcept;

double sum(std::span<const double> p) noexcept;

/// dst[i] = factor * src[i]; the spans must have equal length.
void scale(std::span<const double> src, double factor, std::span<double> dst) noexcept;

/// Relative strong-typicality test on a joint-type histogram: for every cell,
/// |count/n - p| <= eps*p when p > 0, and count == 0 when p == 0.
bool counts_typical(std::span<const std::uint32_t> counts, std::span<const double> probs,
                    std::uint32_t n, double eps) noexcept;

namespace base {
void neg_plogp(std::span<const double> p, std::span<double> out) noexcept;
double sum(std::span<const double> p) noexcept;
void scale(std::span<const double> src, double factor, std::span<double> dst) noexcept;
bool counts_typical(std::span<const std::uint32_t> counts, std::span<const double> probs,
                    std::uint32_t n, double eps) noexcept;
}  // namespace base

#if defined(GWSI_HAVE_AVX2)
namespace avx2 {
void neg_plogp(std::span<const double> p, std::span<double> out) noexcept;
double sum(std::span<const double> p) noexcept;
void scale(std::span<const double> src, double factor, std::span<double> dst) noexcept;
bool counts_typical(std::span<const std::uint32_t> counts, std::span<const double> probs,
                    std::uint32_t n, double eps) noexcept;
}  // namespace avx2
#endif

}  // namespace gwsi::simd
