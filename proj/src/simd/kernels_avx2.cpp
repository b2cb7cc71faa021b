// Compiled with -mavx2 -mfma; only reached through the runtime dispatcher.

#include "gwsi/simd.hpp"

#include <immintrin.h>

#include <array>
#include <cfloat>
#include <cmath>

namespace gwsi::simd::avx2 {

namespace {

// Natural log of four positive normal doubles. Range reduction to a mantissa
// in [sqrt(1/2), sqrt(2)) followed by the classic Cephes rational
// approximation of log(1+x); accurate to about one ulp.
inline __m256d log_pd(__m256d v) {
  const __m256i bits = _mm256_castpd_si256(v);
  const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
  const __m256d two52 = _mm256_set1_pd(4503599627370496.0);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(exp_bits, _mm256_castpd_si256(two52))), two52);
  e = _mm256_sub_pd(e, _mm256_set1_pd(1022.0));

  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i half_bits = _mm256_set1_epi64x(0x3FE0000000000000LL);
  const __m256d m =
      _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_bits));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(small, one));
  const __m256d x = _mm256_sub_pd(_mm256_blendv_pd(m, _mm256_add_pd(m, m), small), one);

  const __m256d z = _mm256_mul_pd(x, x);

  __m256d num = _mm256_set1_pd(1.01875663804580931796E-4);
  num = _mm256_fmadd_pd(num, x, _mm256_set1_pd(4.97494994976747001425E-1));
  num = _mm256_fmadd_pd(num, x, _mm256_set1_pd(4.70579119878881725854E0));
  num = _mm256_fmadd_pd(num, x, _mm256_set1_pd(1.44989225341610930846E1));
  num = _mm256_fmadd_pd(num, x, _mm256_set1_pd(1.79368678507819816313E1));
  num = _mm256_fmadd_pd(num, x, _mm256_set1_pd(7.70838733755885391666E0));

  __m256d den = _mm256_add_pd(x, _mm256_set1_pd(1.12873587189167450590E1));
  den = _mm256_fmadd_pd(den, x, _mm256_set1_pd(4.52279145837532221105E1));
  den = _mm256_fmadd_pd(den, x, _mm256_set1_pd(8.29875266912776603211E1));
  den = _mm256_fmadd_pd(den, x, _mm256_set1_pd(7.11544750618563894466E1));
  den = _mm256_fmadd_pd(den, x, _mm256_set1_pd(2.31251620126765340583E1));

  __m256d y = _mm256_mul_pd(x, _mm256_div_pd(_mm256_mul_pd(z, num), den));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
  __m256d r = _mm256_add_pd(x, y);
  r = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);
  return r;
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d plogp_block(__m256d p) {
  const __m256d live = _mm256_cmp_pd(p, _mm256_set1_pd(DBL_MIN), _CMP_GE_OQ);
  const __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), p, live);
  const __m256d t = _mm256_mul_pd(safe, log_pd(safe));
  return _mm256_and_pd(t, live);
}

}  // namespace

void neg_plogp(std::span<const double> p, std::span<double> out) noexcept {
  // -p ln p / ln 2; the blocks are independent, so two per step keep both
  // FMA pipes busy.
  const __m256d k = _mm256_set1_pd(-1.44269504088896340736);
  std::size_t i = 0;
  const std::size_t n = p.size();
  for (; i + 8 <= n; i += 8) {
    const __m256d a = plogp_block(_mm256_loadu_pd(p.data() + i));
    const __m256d b = plogp_block(_mm256_loadu_pd(p.data() + i + 4));
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(a, k));
    _mm256_storeu_pd(out.data() + i + 4, _mm256_mul_pd(b, k));
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out.data() + i, _mm256_mul_pd(plogp_block(_mm256_loadu_pd(p.data() + i)), k));
  }
  if (i < n) {
    std::array<double, 4> tail{0.0, 0.0, 0.0, 0.0};
    for (std::size_t j = 0; i + j < n; ++j) tail[j] = p[i + j];
    _mm256_storeu_pd(tail.data(), _mm256_mul_pd(plogp_block(_mm256_loadu_pd(tail.data())), k));
    for (std::size_t j = 0; i + j < n; ++j) out[i + j] = tail[j];
  }
}

double sum(std::span<const double> p) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  const std::size_t n = p.size();
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(p.data() + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(p.data() + i + 4));
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += p[i];
  return acc;
}

void scale(std::span<const double> src, double factor, std::span<double> dst) noexcept {
  const __m256d f = _mm256_set1_pd(factor);
  std::size_t i = 0;
  const std::size_t n = src.size();
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(dst.data() + i, _mm256_mul_pd(f, _mm256_loadu_pd(src.data() + i)));
  }
  for (; i < n; ++i) dst[i] = factor * src[i];
}

bool counts_typical(std::span<const std::uint32_t> counts, std::span<const double> probs,
                    std::uint32_t n, double eps) noexcept {
  const double dn = static_cast<double>(n);
  const __m256d vn = _mm256_set1_pd(dn);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
  std::size_t i = 0;
  const std::size_t len = counts.size();
  for (; i + 4 <= len; i += 4) {
    const __m128i ci = _mm_loadu_si128(reinterpret_cast<const __m128i*>(counts.data() + i));
    const __m256d c = _mm256_cvtepi32_pd(ci);
    const __m256d p = _mm256_loadu_pd(probs.data() + i);
    const __m256d dev = _mm256_and_pd(_mm256_sub_pd(_mm256_div_pd(c, vn), p), abs_mask);
    const __m256d ok_pos = _mm256_cmp_pd(dev, _mm256_mul_pd(veps, p), _CMP_LE_OQ);
    const __m256d ok_zero = _mm256_cmp_pd(c, zero, _CMP_EQ_OQ);
    const __m256d p_zero = _mm256_cmp_pd(p, zero, _CMP_EQ_OQ);
    const __m256d ok = _mm256_blendv_pd(ok_pos, ok_zero, p_zero);
    if (_mm256_movemask_pd(ok) != 0xF) return false;
  }
  for (; i < len; ++i) {
    const double p = probs[i];
    if (p == 0.0) {
      if (counts[i] != 0) return false;
      continue;
    }
    if (std::fabs(static_cast<double>(counts[i]) / dn - p) > eps * p) return false;
  }
  return true;
}

}  // namespace gwsi::simd::avx2
