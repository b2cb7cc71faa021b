#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "gwsi/codec.hpp"

namespace gwsi::detail {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of substream `stream`; stream 0 builds the code, stream t+1 drives trial t.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64(s);
  std::uint64_t t = a ^ (stream * 0xd1b54a32d192ed03ULL);
  return splitmix64(t);
}

/// Uniform on [0,1) with 53 random bits; avoids the implementation-defined
/// std::uniform_real_distribution so streams match across standard libraries.
inline double uniform01(std::mt19937_64& g) noexcept {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF sampler over a finite pmf; never returns a zero-mass index.
class Sampler {
 public:
  explicit Sampler(std::span<const double> probs);
  std::size_t operator()(std::mt19937_64& g) const;

 private:
  std::vector<double> cdf_;
  std::size_t last_ = 0;
};

/// Joint-type test of one varying sequence against fixed companions.
class TypicalityScanner {
 public:
  TypicalityScanner(const JointPMF& marg, Var free, double eps);

  /// Fixes the companion sequences; every variable of the marginal except
  /// `free` must be given exactly once.
  void fix(std::size_t n, std::initializer_list<std::pair<Var, std::span<const std::uint8_t>>> seqs);
  bool test(std::span<const std::uint8_t> word);

 private:
  JointPMF marg_;
  Var free_;
  double eps_;
  std::size_t free_stride_ = 0;
  std::vector<std::size_t> base_;
  std::vector<std::uint32_t> counts_;
};

/// Marginals used by the encoder and decoders, computed once per code.
struct CodecContext {
  explicit CodecContext(const JointPMF& joint);
  JointPMF wxy, wu, wv, xwu, ywv;
};

Encoded encode(const Codebooks& cb, const CodecContext& ctx, const CodeParams& params,
               std::span<const std::uint8_t> x, std::span<const std::uint8_t> y);
Decoded decode_side(const Codebook& cw, const Codebook& cs, const JointPMF& w_side,
                    const JointPMF& s_w_side, Var target, Var side, double eps, bool x_branch,
                    std::uint32_t m0, std::uint32_t ms, std::span<const std::uint8_t> side_seq);

}  // namespace gwsi::detail
