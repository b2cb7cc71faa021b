#include <algorithm>
#include <stdexcept>
#include <string>

#include "gwsi/simd.hpp"
#include "internal.hpp"

namespace gwsi {

bool strongly_typical(std::span<const std::span<const std::uint8_t>> seqs, const JointPMF& pmf,
                      double epsilon) {
  if (seqs.size() != pmf.vars().size()) {
    throw std::invalid_argument("strongly_typical: expected " +
                                std::to_string(pmf.vars().size()) + " sequences, got " +
                                std::to_string(seqs.size()));
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("strongly_typical: epsilon must be > 0");
  const std::size_t n = seqs.empty() ? 0 : seqs.front().size();
  for (const auto& s : seqs) {
    if (s.size() != n) throw std::invalid_argument("strongly_typical: sequence length mismatch");
  }
  if (n == 0) throw std::invalid_argument("strongly_typical: empty sequences");
  const auto strides = pmf.strides();
  std::vector<std::uint32_t> counts(pmf.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t off = 0;
    for (std::size_t a = 0; a < seqs.size(); ++a) {
      const std::uint8_t sym = seqs[a][i];
      if (sym >= pmf.vars()[a].size) {
        throw std::invalid_argument("strongly_typical: symbol out of range");
      }
      off += sym * strides[a];
    }
    ++counts[off];
  }
  return simd::counts_typical(counts, pmf.probs(), static_cast<std::uint32_t>(n), epsilon);
}

namespace detail {

Sampler::Sampler(std::span<const double> probs) : cdf_(probs.size()) {
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cdf_[i] = acc;
    if (probs[i] > 0.0) last_ = i;
  }
}

std::size_t Sampler::operator()(std::mt19937_64& g) const {
  const double u = uniform01(g);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto i = static_cast<std::size_t>(it - cdf_.begin());
  return std::min(i, last_);
}

TypicalityScanner::TypicalityScanner(const JointPMF& marg, Var free, double eps)
    : marg_(marg), free_(free), eps_(eps), counts_(marg.size(), 0) {
  free_stride_ = marg_.strides()[marg_.axis(free)];
}

void TypicalityScanner::fix(
    std::size_t n, std::initializer_list<std::pair<Var, std::span<const std::uint8_t>>> seqs) {
  if (seqs.size() + 1 != marg_.vars().size()) {
    throw std::invalid_argument("TypicalityScanner: wrong number of companion sequences");
  }
  const auto strides = marg_.strides();
  base_.assign(n, 0);
  for (const auto& [var, seq] : seqs) {
    if (seq.size() != n) throw std::invalid_argument("TypicalityScanner: length mismatch");
    const std::size_t stride = strides[marg_.axis(var)];
    for (std::size_t i = 0; i < n; ++i) base_[i] += seq[i] * stride;
  }
}

bool TypicalityScanner::test(std::span<const std::uint8_t> word) {
  const auto probs = marg_.probs();
  std::fill(counts_.begin(), counts_.end(), 0u);
  for (std::size_t i = 0; i < base_.size(); ++i) {
    const std::size_t cell = base_[i] + word[i] * free_stride_;
    if (probs[cell] == 0.0) return false;
    ++counts_[cell];
  }
  return simd::counts_typical(counts_, probs, static_cast<std::uint32_t>(base_.size()), eps_);
}

CodecContext::CodecContext(const JointPMF& joint)
    : wxy(marginal(joint, VarSet{Var::W, Var::X, Var::Y})),
      wu(marginal(joint, VarSet{Var::W, Var::U})),
      wv(marginal(joint, VarSet{Var::W, Var::V})),
      xwu(marginal(joint, VarSet{Var::W, Var::X, Var::U})),
      ywv(marginal(joint, VarSet{Var::W, Var::Y, Var::V})) {}

}  // namespace detail

}  // namespace gwsi
