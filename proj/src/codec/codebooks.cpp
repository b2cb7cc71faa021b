#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "internal.hpp"

namespace gwsi {

namespace {

// Rates times n are often meant to be integers; keep 1e-9 of slack so that
// 8 * 0.125 does not round the wrong way.
constexpr double kExponentSlack = 1e-9;
constexpr std::uint64_t kMaxExponent = 32;

std::uint64_t exponent(double bits, bool up) {
  const double e = up ? std::ceil(bits - kExponentSlack) : std::floor(bits + kExponentSlack);
  return static_cast<std::uint64_t>(std::max(0.0, e));
}

void check_rate(double r, const char* name) {
  if (!std::isfinite(r) || r < 0.0) {
    throw std::invalid_argument(std::string(name) + " must be a finite nonnegative rate");
  }
}

Codebook draw(std::size_t n, std::size_t alphabet, std::span<const double> pmf, std::uint64_t words,
              std::uint64_t bins, std::mt19937_64& g) {
  const detail::Sampler sample(pmf);
  std::vector<std::uint8_t> symbols(static_cast<std::size_t>(words) * n);
  for (auto& s : symbols) s = static_cast<std::uint8_t>(sample(g));
  std::vector<std::uint32_t> labels(static_cast<std::size_t>(words));
  for (auto& b : labels) b = static_cast<std::uint32_t>(g() & (bins - 1));
  return Codebook(n, alphabet, std::move(symbols), std::move(labels), bins);
}

}  // namespace

void validate_params(const CodeParams& p) {
  if (p.n < 1) throw std::invalid_argument("block length n must be >= 1");
  if (p.n > 4096) throw std::invalid_argument("block length n must be <= 4096");
  check_rate(p.rate0p, "R0'");
  check_rate(p.rate1p, "R1'");
  check_rate(p.rate2p, "R2'");
  check_rate(p.rate0, "R0");
  check_rate(p.rate1, "R1");
  check_rate(p.rate2, "R2");
  if (p.rate0 > p.rate0p + 1e-12 || p.rate1 > p.rate1p + 1e-12 || p.rate2 > p.rate2p + 1e-12) {
    throw std::invalid_argument("bin rates must not exceed the codebook rates");
  }
  if (!(p.epsilon > 0.0) || !std::isfinite(p.epsilon)) {
    throw std::invalid_argument("epsilon must be > 0");
  }
  const double n = static_cast<double>(p.n);
  for (double r : {p.rate0p, p.rate1p, p.rate2p}) {
    if (exponent(n * r, true) > kMaxExponent) {
      throw std::invalid_argument("codebook size 2^ceil(n R') exceeds 2^32");
    }
  }
}

CodeSizes code_sizes(const CodeParams& p) {
  validate_params(p);
  const double n = static_cast<double>(p.n);
  auto pow2 = [](std::uint64_t e) { return std::uint64_t{1} << e; };
  CodeSizes s{pow2(exponent(n * p.rate0p, true)), pow2(exponent(n * p.rate1p, true)),
              pow2(exponent(n * p.rate2p, true)), pow2(exponent(n * p.rate0, false)),
              pow2(exponent(n * p.rate1, false)), pow2(exponent(n * p.rate2, false))};
  // Rounding can make floor(n R) exceed ceil(n R') only when R > R'.
  s.bw = std::min(s.bw, s.w);
  s.bx = std::min(s.bx, s.x);
  s.by = std::min(s.by, s.y);
  return s;
}

Codebook::Codebook(std::size_t n, std::size_t alphabet, std::vector<std::uint8_t> symbols,
                   std::vector<std::uint32_t> bins, std::uint64_t bin_count)
    : n_(n),
      alphabet_(alphabet),
      symbols_(std::move(symbols)),
      bins_(std::move(bins)),
      bin_count_(bin_count) {
  if (n_ == 0 || symbols_.size() != bins_.size() * n_) {
    throw std::invalid_argument("Codebook: symbol matrix does not match the label count");
  }
  std::vector<std::uint64_t> keyed(bins_.size());
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    if (bins_[i] >= bin_count_) throw std::invalid_argument("Codebook: bin label out of range");
    keyed[i] = (std::uint64_t{bins_[i]} << 32) | i;
  }
  std::sort(keyed.begin(), keyed.end());
  by_bin_.resize(keyed.size());
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    by_bin_[i] = static_cast<std::uint32_t>(keyed[i] & 0xffffffffu);
  }
}

std::span<const std::uint32_t> Codebook::bin_members(std::uint64_t b) const {
  const auto lo = std::partition_point(by_bin_.begin(), by_bin_.end(),
                                       [&](std::uint32_t i) { return bins_[i] < b; });
  const auto hi =
      std::partition_point(lo, by_bin_.end(), [&](std::uint32_t i) { return bins_[i] <= b; });
  return {by_bin_.data() + (lo - by_bin_.begin()), static_cast<std::size_t>(hi - lo)};
}

Codebooks gen_codebooks(const JointPMF& joint, const CodeParams& params) {
  const CodeSizes s = code_sizes(params);
  const std::uint64_t total = (s.w + s.x + s.y) * params.n;
  if (total > params.max_codebook_symbols) {
    throw std::length_error("codebooks need " + std::to_string(total) +
                            " symbols, above the limit of " +
                            std::to_string(params.max_codebook_symbols));
  }
  for (Var v : {Var::W, Var::X, Var::Y}) {
    if (joint.card(v) > 256) throw std::invalid_argument("alphabets above 256 symbols");
  }
  const JointPMF pw = marginal(joint, VarSet{Var::W});
  const JointPMF px = marginal(joint, VarSet{Var::X});
  const JointPMF py = marginal(joint, VarSet{Var::Y});
  std::mt19937_64 g(detail::derive_seed(params.seed, 0));
  Codebooks cb;
  cb.w = draw(params.n, joint.card(Var::W), pw.probs(), s.w, s.bw, g);
  cb.x = draw(params.n, joint.card(Var::X), px.probs(), s.x, s.bx, g);
  cb.y = draw(params.n, joint.card(Var::Y), py.probs(), s.y, s.by, g);
  return cb;
}

}  // namespace gwsi
