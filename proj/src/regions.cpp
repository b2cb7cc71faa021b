#include "gwsi/regions.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace gwsi {

namespace {

constexpr double kMarkovTolerance = 1e-9;
constexpr double kSlackTolerance = 1e-9;

// Element-wise; std::array's operator== goes through memcmp, which is slow
// for three ints.
bool same(const std::array<int, 3>& a, const std::array<int, 3>& b) {
  return a[0] == b[0] && a[1] == b[1] && a[2] == b[2];
}

bool admissible(const std::array<int, 3>& c) {
  return same(c, kR0) || same(c, kR1) || same(c, kR2) || same(c, kR0R1) || same(c, kR0R2);
}

// Information differences can come out a few ulps below zero.
double clamp_bound(double v) { return v < 0.0 ? 0.0 : v; }

void require_vars(const JointPMF& joint, VarSet needed, const char* what) {
  if (!needed.subset_of(joint.var_set())) {
    throw std::invalid_argument(std::string(what) + ": joint over " +
                                joint.var_set().to_string() + " lacks " +
                                (needed - joint.var_set()).to_string());
  }
}

void require_cap(const JointPMF& joint, Var v, std::size_t cap, const char* what) {
  if (joint.card(v) > cap) {
    throw std::domain_error(std::string(what) + ": |" + std::string(to_string(v)) + "| = " +
                            std::to_string(joint.card(v)) + " exceeds the cap " +
                            std::to_string(cap));
  }
}

HalfspaceRegion axis_region(double r0a, double r0b, double r1, double r2) {
  HalfspaceRegion region({{kR0, clamp_bound(std::max(r0a, r0b))},
                          {kR1, clamp_bound(r1)},
                          {kR2, clamp_bound(r2)}});
  region.common_operands = std::array<double, 2>{r0a, r0b};
  return region;
}

// Entropies of one joint, memoised by variable set. Region evaluations ask
// for the same marginals several times, and callers often evaluate several
// regions of one joint in a row, so the memo is per thread and survives
// until a joint with different contents comes along.
class Entropies {
 public:
  explicit Entropies(const JointPMF& joint) : joint_(joint), m_(memo()) {
    if (m_.vars == joint.vars() && std::equal(m_.probs.begin(), m_.probs.end(),
                                              joint.probs().begin(), joint.probs().end())) {
      return;
    }
    m_.vars = joint.vars();
    m_.probs.assign(joint.probs().begin(), joint.probs().end());
    m_.known = {};
    // Size-1 variables carry no information; dropping them from the key lets
    // e.g. H(W,U) with constant U share the value of H(W).
    m_.trivial = VarSet{};
    for (const auto& a : joint.vars()) {
      if (a.size == 1) m_.trivial = m_.trivial | VarSet{a.name};
    }
  }

  double h(VarSet s) {
    s = s - m_.trivial;
    if (!is_known(s)) store(s, entropy(joint_, s));
    return m_.value[s.bits()];
  }
  /// Computes every listed entropy in one batch.
  void prefetch(std::initializer_list<VarSet> sets) {
    std::array<VarSet, 16> todo;
    std::array<double, 16> vals;
    std::size_t n = 0;
    for (VarSet s : sets) {
      s = s - m_.trivial;
      if (is_known(s) || n == todo.size()) continue;
      if (std::find(todo.begin(), todo.begin() + static_cast<std::ptrdiff_t>(n), s) ==
          todo.begin() + static_cast<std::ptrdiff_t>(n)) {
        todo[n++] = s;
      }
    }
    if (n == 0) return;
    entropies(joint_, std::span<const VarSet>(todo.data(), n), std::span<double>(vals.data(), n));
    for (std::size_t k = 0; k < n; ++k) store(todo[k], vals[k]);
  }

  double h(VarSet a, VarSet given) { return h(a | given) - h(given); }
  double i(VarSet a, VarSet b) { return h(a) + h(b) - h(a | b); }
  double i(VarSet a, VarSet b, VarSet given) {
    return h(a | given) + h(b | given) - h(a | b | given) - h(given);
  }

 private:
  struct Memo {
    std::vector<Alphabet> vars;
    std::vector<double> probs;
    VarSet trivial;
    std::array<double, 128> value;  // only read where known is set
    std::array<std::uint64_t, 2> known{};
  };
  static Memo& memo() {
    thread_local Memo m;
    return m;
  }

  bool is_known(VarSet s) const { return (m_.known[s.bits() >> 6] >> (s.bits() & 63)) & 1u; }
  void store(VarSet s, double v) {
    m_.value[s.bits()] = v;
    m_.known[s.bits() >> 6] |= std::uint64_t{1} << (s.bits() & 63);
  }

  const JointPMF& joint_;
  Memo& m_;
};

void require_markov(Entropies& e, VarSet aux, VarSet given, VarSet rest, const char* what) {
  const double leak = e.i(aux, rest, given);
  if (leak > kMarkovTolerance) {
    throw std::domain_error(std::string(what) + ": joint does not factor as p(aux|" +
                            given.to_string() + ")p(source); I(" + aux.to_string() + ";" +
                            rest.to_string() + "|" + given.to_string() + ") = " +
                            std::to_string(leak));
  }
}

struct SideInfoTerms {
  double common;
  double common_u;
  double common_v;
  double private_x;
  double private_y;
};

SideInfoTerms side_info_terms(const JointPMF& joint, Checks checks, const char* what) {
  const VarSet x{Var::X}, y{Var::Y}, u{Var::U}, v{Var::V}, w{Var::W};
  require_vars(joint, x | y | u | v | w, what);
  Entropies e(joint);
  e.prefetch({x | y | u, w | u, u, w | x | y | u, x | y | v, w | v, v, w | x | y | v, x | w | u,
              y | w | v});
  if (checks == Checks::full) {
    e.prefetch({w | x | y, x | y | u | v, w | x | y | u | v, x | y});
    require_markov(e, w, x | y, u | v, what);
  }
  SideInfoTerms t{};
  t.common_u = e.i(x | y, w, u);
  t.common_v = e.i(x | y, w, v);
  t.common = std::max(t.common_u, t.common_v);
  t.private_x = e.h(x, w | u);
  t.private_y = e.h(y, w | v);
  return t;
}

}  // namespace

HalfspaceRegion::HalfspaceRegion(std::vector<Halfspace> constraints)
    : constraints_(std::move(constraints)) {
  for (const auto& h : constraints_) {
    if (!admissible(h.coeffs)) {
      throw std::invalid_argument("unsupported constraint coefficient vector");
    }
    if (!(h.bound >= 0.0)) throw std::invalid_argument("constraint bound must be >= 0");
  }
}

std::optional<double> HalfspaceRegion::bound(const std::array<int, 3>& coeffs) const {
  std::optional<double> best;
  for (const auto& h : constraints_) {
    if (same(h.coeffs, coeffs)) best = best ? std::max(*best, h.bound) : h.bound;
  }
  return best;
}

HalfspaceRegion gw_region(const JointPMF& joint) {
  const VarSet x{Var::X}, y{Var::Y}, w{Var::W};
  require_vars(joint, x | y | w, "gw_region");
  Entropies e(joint);
  e.prefetch({x | y, w, w | x | y, x | w, y | w});
  return HalfspaceRegion({{kR0, clamp_bound(e.i(x | y, w))},
                          {kR1, clamp_bound(e.h(x, w))},
                          {kR2, clamp_bound(e.h(y, w))}});
}

HalfspaceRegion inner_region(const JointPMF& joint, Checks checks) {
  const auto t = side_info_terms(joint, checks, "inner_region");
  return axis_region(t.common_u, t.common_v, t.private_x, t.private_y);
}

HalfspaceRegion outer_region(const JointPMF& joint, Checks checks) {
  const auto t = side_info_terms(joint, checks, "outer_region");
  const double m = clamp_bound(t.common);
  HalfspaceRegion region({{kR0, m},
                          {kR0R1, m + clamp_bound(t.private_x)},
                          {kR0R2, m + clamp_bound(t.private_y)}});
  region.common_operands = std::array<double, 2>{t.common_u, t.common_v};
  return region;
}

HalfspaceRegion star_region(const JointPMF& joint, Checks checks) {
  const VarSet a{Var::A}, b{Var::B}, x{Var::X}, u{Var::U}, v{Var::V};
  require_vars(joint, a | b | x | u | v, "star_region");
  Entropies e(joint);
  if (checks == Checks::full) {
    e.prefetch({a | b | x, x | u | v, a | b | x | u | v, x});
    require_markov(e, a | b, x, u | v, "star_region");
    require_cap(joint, Var::A, joint.card(Var::X) + 1, "star_region");
    require_cap(joint, Var::B, joint.card(Var::X) + 1, "star_region");
  }
  e.prefetch({x | a | u, a | u, x | b | v, b | v, x | u, u, x | v, v});
  return axis_region(e.h(x, a | u), e.h(x, b | v), e.i(x, a, u), e.i(x, b, v));
}

HalfspaceRegion starstar_region(const JointPMF& joint, Checks checks) {
  const VarSet a{Var::A}, b{Var::B}, x{Var::X}, y{Var::Y};
  require_vars(joint, a | b | x | y, "starstar_region");
  if (checks == Checks::full) {
    const std::size_t cap = joint.card(Var::X) * joint.card(Var::Y) + 1;
    require_cap(joint, Var::A, cap, "starstar_region");
    require_cap(joint, Var::B, cap, "starstar_region");
  }
  Entropies e(joint);
  e.prefetch({x | a | y, a | y, y | b | x, b | x, x | y, y, x});
  return axis_region(e.h(x, a | y), e.h(y, b | x), e.i(x, a, y), e.i(y, b, x));
}

double min_slack(const HalfspaceRegion& region, const RateTriple& t) noexcept {
  double worst = 0.0;
  bool first = true;
  for (const auto& h : region.constraints()) {
    const double lhs = h.coeffs[0] * t.r0 + h.coeffs[1] * t.r1 + h.coeffs[2] * t.r2;
    const double slack = lhs - h.bound;
    if (first || slack < worst) worst = slack;
    first = false;
  }
  return worst;
}

bool contains(const HalfspaceRegion& region, const RateTriple& t) noexcept {
  return min_slack(region, t) >= -kSlackTolerance;
}

RateTriple corner(const HalfspaceRegion& region) {
  for (const auto& h : region.constraints()) {
    if (same(h.coeffs, kR0R1) || same(h.coeffs, kR0R2)) {
      throw std::invalid_argument("corner: region has sum-rate constraints");
    }
  }
  return RateTriple{region.bound(kR0).value_or(0.0), region.bound(kR1).value_or(0.0),
                    region.bound(kR2).value_or(0.0)};
}

}  // namespace gwsi
