#include <algorithm>
#include <cstring>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "internal.hpp"

namespace gwsi {

std::string_view to_string(Event e) noexcept {
  switch (e) {
    case Event::E1: return "E1";
    case Event::E2: return "E2";
    case Event::E3x: return "E3x";
    case Event::E3y: return "E3y";
    case Event::E4x: return "E4x";
    case Event::E4y: return "E4y";
    case Event::E5x: return "E5x";
    case Event::E5y: return "E5y";
    case Event::E6x: return "E6x";
    case Event::E6y: return "E6y";
  }
  return "?";
}

namespace {

void check_length(std::span<const std::uint8_t> s, std::size_t n, const char* what) {
  if (s.size() != n) {
    throw std::invalid_argument(std::string(what) + " has length " + std::to_string(s.size()) +
                                ", expected " + std::to_string(n));
  }
}

// Smallest index whose codeword equals `target`, if any.
std::optional<std::uint32_t> find_exact(const Codebook& cb, std::span<const std::uint8_t> target) {
  for (std::size_t i = 0; i < cb.size(); ++i) {
    const auto w = cb.word(i);
    if (std::memcmp(w.data(), target.data(), w.size()) == 0) {
      return static_cast<std::uint32_t>(i);
    }
  }
  return std::nullopt;
}

struct BinSearch {
  std::optional<std::uint32_t> chosen;  // nullopt only for an empty bin
  std::size_t matches = 0;
};

// Scans a bin in index order: first match if any, else the first member.
BinSearch search_bin(const Codebook& cb, std::uint64_t label, detail::TypicalityScanner& scan) {
  BinSearch r;
  const auto members = cb.bin_members(label);
  for (std::uint32_t i : members) {
    if (scan.test(cb.word(i))) {
      if (r.matches == 0) r.chosen = i;
      if (++r.matches >= 2) break;
    }
  }
  if (r.matches == 0 && !members.empty()) r.chosen = members.front();
  return r;
}

}  // namespace

namespace detail {

Encoded encode(const Codebooks& cb, const CodecContext& ctx, const CodeParams& params,
               std::span<const std::uint8_t> x, std::span<const std::uint8_t> y) {
  check_length(x, params.n, "x sequence");
  check_length(y, params.n, "y sequence");
  Encoded e;
  TypicalityScanner scan(ctx.wxy, Var::W, params.epsilon);
  scan.fix(params.n, {{Var::X, x}, {Var::Y, y}});
  bool found = false;
  for (std::size_t i = 0; i < cb.w.size(); ++i) {
    if (scan.test(cb.w.word(i))) {
      e.m0p = static_cast<std::uint32_t>(i);
      found = true;
      break;
    }
  }
  if (!found) e.flags |= flag(Event::E2);
  if (auto i = find_exact(cb.x, x)) {
    e.m1p = *i;
  } else {
    e.flags |= flag(Event::E3x);
  }
  if (auto i = find_exact(cb.y, y)) {
    e.m2p = *i;
  } else {
    e.flags |= flag(Event::E3y);
  }
  e.m0 = cb.w.bin(e.m0p);
  e.m1 = cb.x.bin(e.m1p);
  e.m2 = cb.y.bin(e.m2p);
  return e;
}

Decoded decode_side(const Codebook& cw, const Codebook& cs, const JointPMF& w_side,
                    const JointPMF& s_w_side, Var target, Var side, double eps, bool x_branch,
                    std::uint32_t m0, std::uint32_t ms, std::span<const std::uint8_t> side_seq) {
  const std::size_t n = cw.n();
  check_length(side_seq, n, "side information");
  if (m0 >= cw.bin_count()) throw std::invalid_argument("common bin label out of range");
  if (ms >= cs.bin_count()) throw std::invalid_argument("private bin label out of range");
  const EventFlags none = x_branch ? flag(Event::E4x) : flag(Event::E4y);
  const EventFlags many = x_branch ? flag(Event::E5x) : flag(Event::E5y);
  const EventFlags second = x_branch ? flag(Event::E6x) : flag(Event::E6y);

  Decoded d;
  std::vector<std::uint8_t> w_hat(n, 0);
  TypicalityScanner stage1(w_side, Var::W, eps);
  stage1.fix(n, {{side, side_seq}});
  const BinSearch s1 = search_bin(cw, m0, stage1);
  if (s1.matches == 0) d.flags |= none;
  if (s1.matches >= 2) d.flags |= many;
  if (s1.chosen) {
    d.w_index = *s1.chosen;
    const auto w = cw.word(*s1.chosen);
    std::copy(w.begin(), w.end(), w_hat.begin());
  } else {
    d.w_index = std::numeric_limits<std::uint32_t>::max();
  }

  TypicalityScanner stage2(s_w_side, target, eps);
  stage2.fix(n, {{Var::W, w_hat}, {side, side_seq}});
  const BinSearch s2 = search_bin(cs, ms, stage2);
  if (s2.matches != 1) d.flags |= second;
  d.estimate.assign(n, 0);
  if (s2.chosen) {
    const auto s = cs.word(*s2.chosen);
    std::copy(s.begin(), s.end(), d.estimate.begin());
  }
  return d;
}

}  // namespace detail

Encoded encode(const Codebooks& cb, const JointPMF& joint, const CodeParams& params,
               std::span<const std::uint8_t> x, std::span<const std::uint8_t> y) {
  validate_params(params);
  return detail::encode(cb, detail::CodecContext(joint), params, x, y);
}

Decoded decode_x(const Codebooks& cb, const JointPMF& joint, const CodeParams& params,
                 std::uint32_t m0, std::uint32_t m1, std::span<const std::uint8_t> u) {
  validate_params(params);
  const detail::CodecContext ctx(joint);
  return detail::decode_side(cb.w, cb.x, ctx.wu, ctx.xwu, Var::X, Var::U, params.epsilon, true,
                             m0, m1, u);
}

Decoded decode_y(const Codebooks& cb, const JointPMF& joint, const CodeParams& params,
                 std::uint32_t m0, std::uint32_t m2, std::span<const std::uint8_t> v) {
  validate_params(params);
  const detail::CodecContext ctx(joint);
  return detail::decode_side(cb.w, cb.y, ctx.wv, ctx.ywv, Var::Y, Var::V, params.epsilon, false,
                             m0, m2, v);
}

}  // namespace gwsi
