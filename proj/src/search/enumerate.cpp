#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "internal.hpp"

namespace gwsi {

namespace {

constexpr double kStructureTolerance = 1e-9;

void require_source_vars(const JointPMF& source, VarSet vars, BoundFamily family) {
  if (!vars.subset_of(source.var_set())) {
    throw std::invalid_argument(std::string(to_string(family)) + " family needs a source over " +
                                vars.to_string() + ", got " + source.var_set().to_string());
  }
}

}  // namespace

std::string_view to_string(BoundFamily f) noexcept {
  switch (f) {
    case BoundFamily::gw: return "gw";
    case BoundFamily::inner: return "inner";
    case BoundFamily::outer: return "outer";
    case BoundFamily::star: return "star";
    case BoundFamily::starstar: return "starstar";
  }
  return "?";
}

BoundFamily family_from_string(std::string_view name) {
  for (auto f : {BoundFamily::gw, BoundFamily::inner, BoundFamily::outer, BoundFamily::star,
                 BoundFamily::starstar}) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown bound family '" + std::string(name) + "'");
}

bool same_variable(const JointPMF& source, Var a, Var b) {
  const VarSet sa{a}, sb{b};
  return cond_entropy(source, sa, sb) <= kStructureTolerance &&
         cond_entropy(source, sb, sa) <= kStructureTolerance;
}

bool is_function_of(const JointPMF& source, Var of, Var by) {
  return cond_entropy(source, VarSet{of}, VarSet{by}) <= kStructureTolerance;
}

bool markov_xy_u_v(const JointPMF& source) {
  return cond_mutual_info(source, VarSet{Var::X, Var::Y}, VarSet{Var::V}, VarSet{Var::U}) <=
         kStructureTolerance;
}

CardinalityCaps resolve_caps(const SearchConfig& cfg, const JointPMF& source,
                             BoundFamily family) {
  const std::size_t nx = source.card(Var::X);
  const std::size_t ny = source.card(Var::Y);
  switch (family) {
    case BoundFamily::gw:
    case BoundFamily::inner:
    case BoundFamily::outer: {
      const std::size_t cap = nx * ny + 3;
      return {cfg.w_card ? cfg.w_card : cap, 1};
    }
    case BoundFamily::star: {
      const std::size_t cap = nx + 1;
      return {cfg.a_card ? cfg.a_card : cap, cfg.b_card ? cfg.b_card : cap};
    }
    case BoundFamily::starstar: {
      const std::size_t cap = nx * ny + 1;
      return {cfg.a_card ? cfg.a_card : cap, cfg.b_card ? cfg.b_card : cap};
    }
  }
  return {1, 1};
}

void validate_config(const SearchConfig& cfg, const JointPMF& source, BoundFamily family) {
  if (cfg.grid < 1) throw std::invalid_argument("search grid must be >= 1");
  if (cfg.grid > 65535) throw std::invalid_argument("search grid must be <= 65535");
  if (!(cfg.tolerance >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
  require_source_vars(source, VarSet{Var::X, Var::Y}, family);
  if (cfg.override_caps) return;
  const std::size_t nx = source.card(Var::X);
  const std::size_t ny = source.card(Var::Y);
  if (cfg.w_card > nx * ny + 3) {
    throw std::invalid_argument("w_card " + std::to_string(cfg.w_card) + " exceeds |X||Y|+3 = " +
                                std::to_string(nx * ny + 3));
  }
  const std::size_t pair_cap = family == BoundFamily::star ? nx + 1 : nx * ny + 1;
  if (family == BoundFamily::star || family == BoundFamily::starstar) {
    if (cfg.a_card > pair_cap || cfg.b_card > pair_cap) {
      throw std::invalid_argument("a_card/b_card exceed the cap " + std::to_string(pair_cap));
    }
  }
}

JointPMF family_base(const JointPMF& source, BoundFamily family) {
  switch (family) {
    case BoundFamily::gw:
      require_source_vars(source, VarSet{Var::X, Var::Y}, family);
      return marginal(source, VarSet{Var::X, Var::Y});
    case BoundFamily::inner:
    case BoundFamily::outer:
      require_source_vars(source, VarSet{Var::X, Var::Y, Var::U, Var::V}, family);
      return source;
    case BoundFamily::star:
      require_source_vars(source, VarSet{Var::X, Var::Y, Var::U, Var::V}, family);
      if (!same_variable(source, Var::X, Var::Y)) {
        throw std::domain_error("star family requires a source with X = Y");
      }
      return marginal(source, VarSet{Var::X, Var::U, Var::V});
    case BoundFamily::starstar:
      require_source_vars(source, VarSet{Var::X, Var::Y, Var::U, Var::V}, family);
      if (!same_variable(source, Var::U, Var::Y) || !same_variable(source, Var::V, Var::X)) {
        throw std::domain_error("starstar family requires a source with U = Y and V = X");
      }
      return marginal(source, VarSet{Var::X, Var::Y});
  }
  throw std::invalid_argument("unknown family");
}

namespace detail {

FamilyLayout make_layout(const JointPMF& source, BoundFamily family) {
  FamilyLayout layout{family, family_base(source, family), {}, 0, {}, false};
  VarSet in_set;
  if (family == BoundFamily::star) {
    layout.inputs = {{Var::X, source.card(Var::X)}};
    in_set = VarSet{Var::X};
  } else {
    layout.inputs = {{Var::X, source.card(Var::X)}, {Var::Y, source.card(Var::Y)}};
    in_set = VarSet{Var::X, Var::Y};
  }
  layout.two_outputs = family == BoundFamily::star || family == BoundFamily::starstar;
  // Marginal axes follow base order; X precedes Y in every base we build.
  const JointPMF inputs = marginal(layout.base, in_set);
  if (inputs.vars().front().name != Var::X) {
    throw std::invalid_argument("source must list X before Y");
  }
  layout.rows = inputs.size();
  for (std::size_t r = 0; r < inputs.size(); ++r) {
    if (inputs.probs()[r] > 0.0) layout.support.push_back(r);
  }
  return layout;
}

namespace {

double log_binomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Column-wise generation of single-output kernels whose columns (vectors over
// the support rows) are nonzero and in nonincreasing lexicographic order;
// exactly one representative per relabelling orbit.
class ColumnGenerator {
 public:
  ColumnGenerator(std::size_t rows, std::size_t cols, std::size_t grid, const CountsVisitor& visit)
      : rows_(rows), cols_(cols), visit_(visit), remaining_(rows, static_cast<std::uint32_t>(grid)),
        counts_(rows * cols, 0) {}

  bool run() { return column(0); }

 private:
  std::uint32_t& at(std::size_t s, std::size_t j) { return counts_[s * cols_ + j]; }

  // True when column j is lexicographically greater than column j - 1.
  bool exceeds_previous(std::size_t j) {
    for (std::size_t s = 0; s < rows_; ++s) {
      if (at(s, j) != at(s, j - 1)) return at(s, j) > at(s, j - 1);
    }
    return false;
  }

  bool column(std::size_t j) {
    if (j + 1 == cols_) {
      std::uint32_t mass = 0;
      for (std::size_t s = 0; s < rows_; ++s) {
        at(s, j) = remaining_[s];
        mass += remaining_[s];
      }
      if (mass == 0) return true;
      if (j > 0 && exceeds_previous(j)) return true;
      return visit_(counts_);
    }
    return entry(j, 0, j > 0, 0);
  }

  // Chooses entry s of column j. `tight` means the prefix so far equals the
  // previous column's prefix, so this entry may not exceed it.
  bool entry(std::size_t j, std::size_t s, bool tight, std::uint32_t mass) {
    if (s == rows_) {
      if (mass == 0) return true;
      std::uint32_t left = 0;
      for (std::size_t r = 0; r < rows_; ++r) left += remaining_[r] - at(r, j);
      if (left < cols_ - 1 - j) return true;
      for (std::size_t r = 0; r < rows_; ++r) remaining_[r] -= at(r, j);
      const bool go = column(j + 1);
      for (std::size_t r = 0; r < rows_; ++r) remaining_[r] += at(r, j);
      return go;
    }
    std::uint32_t hi = remaining_[s];
    if (tight) hi = std::min(hi, at(s, j - 1));
    for (std::uint32_t v = hi + 1; v-- > 0;) {
      at(s, j) = v;
      const bool still_tight = tight && v == at(s, j - 1);
      if (!entry(j, s + 1, still_tight, mass + v)) return false;
    }
    return true;
  }

  std::size_t rows_;
  std::size_t cols_;
  const CountsVisitor& visit_;
  std::vector<std::uint32_t> remaining_;
  std::vector<std::uint32_t> counts_;
};

void compositions(std::size_t parts, std::uint32_t total, std::vector<std::uint32_t>& cur,
                  std::vector<std::vector<std::uint32_t>>& out) {
  if (cur.size() + 1 == parts) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (std::uint32_t v = total + 1; v-- > 0;) {
    cur.push_back(v);
    compositions(parts, total - v, cur, out);
    cur.pop_back();
  }
}

// Marginal column of a two-output kernel: for output A (axis 0) or B (axis 1),
// symbol `sym`, the vector over support rows.
void marginal_columns(std::span<const std::uint32_t> k, std::size_t rows, std::size_t ka,
                      std::size_t kb, int axis, std::vector<std::uint32_t>& out) {
  const std::size_t n = axis == 0 ? ka : kb;
  out.assign(n * rows, 0);
  for (std::size_t s = 0; s < rows; ++s) {
    for (std::size_t a = 0; a < ka; ++a) {
      for (std::size_t b = 0; b < kb; ++b) {
        const std::uint32_t v = k[s * ka * kb + a * kb + b];
        out[(axis == 0 ? a : b) * rows + s] += v;
      }
    }
  }
}

// Columns nonzero and in nonincreasing lexicographic order; returns the tie
// structure through `ties` (ties[i] true when column i equals column i+1).
bool sorted_columns(const std::vector<std::uint32_t>& cols, std::size_t n, std::size_t rows,
                    std::vector<bool>& ties) {
  ties.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    bool nonzero = false;
    for (std::size_t s = 0; s < rows; ++s) nonzero = nonzero || cols[i * rows + s] != 0;
    if (!nonzero) return false;
    if (i + 1 < n) {
      const auto a = cols.begin() + static_cast<std::ptrdiff_t>(i * rows);
      const auto b = cols.begin() + static_cast<std::ptrdiff_t>((i + 1) * rows);
      const int cmp = std::lexicographical_compare(a, a + static_cast<std::ptrdiff_t>(rows), b,
                                                   b + static_cast<std::ptrdiff_t>(rows))
                          ? -1
                          : (std::equal(a, a + static_cast<std::ptrdiff_t>(rows), b) ? 0 : 1);
      if (cmp < 0) return false;
      ties[i] = cmp == 0;
    }
  }
  return true;
}

// Permutations of [0, n) that only move symbols inside runs of tied columns.
std::vector<std::vector<std::size_t>> tie_permutations(const std::vector<bool>& ties,
                                                       std::size_t n) {
  std::vector<std::vector<std::size_t>> perms;
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::size_t> block(n);
  std::size_t b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    block[i] = b;
    if (i + 1 < n && !ties[i]) ++b;
  }
  do {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) ok = block[p[i]] == block[i];
    if (ok) perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return perms;
}

bool canonical_pair(std::span<const std::uint32_t> k, std::size_t rows, std::size_t ka,
                    std::size_t kb) {
  thread_local std::vector<std::uint32_t> cols;
  thread_local std::vector<bool> ties_a, ties_b;
  marginal_columns(k, rows, ka, kb, 0, cols);
  if (!sorted_columns(cols, ka, rows, ties_a)) return false;
  marginal_columns(k, rows, ka, kb, 1, cols);
  if (!sorted_columns(cols, kb, rows, ties_b)) return false;
  const bool any_a = std::find(ties_a.begin(), ties_a.end(), true) != ties_a.end();
  const bool any_b = std::find(ties_b.begin(), ties_b.end(), true) != ties_b.end();
  if (!any_a && !any_b) return true;
  const auto pa = tie_permutations(ties_a, ka);
  const auto pb = tie_permutations(ties_b, kb);
  const std::size_t cells = ka * kb;
  for (const auto& sa : pa) {
    for (const auto& sb : pb) {
      // Compare the relabelled kernel with the original; reject if larger.
      int cmp = 0;
      for (std::size_t s = 0; s < rows && cmp == 0; ++s) {
        for (std::size_t a = 0; a < ka && cmp == 0; ++a) {
          for (std::size_t b = 0; b < kb && cmp == 0; ++b) {
            const std::uint32_t orig = k[s * cells + a * kb + b];
            const std::uint32_t perm = k[s * cells + sa[a] * kb + sb[b]];
            if (perm != orig) cmp = perm > orig ? 1 : -1;
          }
        }
      }
      if (cmp > 0) return false;
    }
  }
  return true;
}

bool pair_generator(std::size_t rows, std::size_t ka, std::size_t kb, std::size_t grid,
                    const CountsVisitor& visit) {
  const std::size_t cells = ka * kb;
  std::vector<std::vector<std::uint32_t>> comps;
  std::vector<std::uint32_t> cur;
  compositions(cells, static_cast<std::uint32_t>(grid), cur, comps);
  std::vector<std::size_t> odo(rows, 0);
  std::vector<std::uint32_t> k(rows * cells);
  for (std::size_t s = 0; s < rows; ++s) std::copy(comps[0].begin(), comps[0].end(), k.begin() + static_cast<std::ptrdiff_t>(s * cells));
  while (true) {
    if (canonical_pair(k, rows, ka, kb) && !visit(k)) return false;
    std::size_t s = rows;
    while (s-- > 0) {
      if (++odo[s] < comps.size()) break;
      odo[s] = 0;
    }
    if (s == static_cast<std::size_t>(-1)) return true;
    for (std::size_t r = s; r < rows; ++r) {
      std::copy(comps[odo[r]].begin(), comps[odo[r]].end(), k.begin() + static_cast<std::ptrdiff_t>(r * cells));
    }
  }
}

}  // namespace

bool for_each_grid_kernel(std::size_t support_rows, std::size_t card_a, std::size_t card_b,
                          std::size_t grid, const CountsVisitor& visit) {
  if (support_rows == 0) return true;
  if (card_b == 1) {
    ColumnGenerator gen(support_rows, card_a, grid, visit);
    return gen.run();
  }
  return pair_generator(support_rows, card_a, card_b, grid, visit);
}

double estimated_work(std::size_t support_rows, std::size_t card_a, std::size_t card_b,
                      std::size_t grid) {
  const double cells = static_cast<double>(card_a * card_b);
  const double per_row = log_binomial(static_cast<double>(grid) + cells - 1.0, cells - 1.0);
  double log_work = per_row * static_cast<double>(support_rows);
  if (card_b == 1) log_work -= std::lgamma(static_cast<double>(card_a) + 1.0);
  return std::exp(log_work);
}

std::size_t effective_grid(std::size_t support_rows, std::size_t card_a, std::size_t card_b,
                           std::size_t grid, std::uint64_t budget) {
  if (budget == 0) return grid;
  std::size_t g = grid;
  while (true) {
    if (estimated_work(support_rows, card_a, card_b, g) <= static_cast<double>(budget)) return g;
    if (g % 2 != 0) return 1;
    g /= 2;
  }
}

std::vector<std::pair<std::size_t, std::size_t>> cardinality_pairs(const CardinalityCaps& caps,
                                                                   bool two_outputs) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (!two_outputs) {
    for (std::size_t k = 1; k <= caps.first; ++k) out.emplace_back(k, 1);
    return out;
  }
  for (std::size_t a = 1; a <= caps.first; ++a) {
    for (std::size_t b = 1; b <= caps.second; ++b) out.emplace_back(a, b);
  }
  return out;
}

namespace {

std::vector<Alphabet> output_alphabets(const FamilyLayout& layout, std::size_t ka,
                                       std::size_t kb) {
  if (layout.two_outputs) return {{Var::A, ka}, {Var::B, kb}};
  return {{Var::W, ka}};
}

}  // namespace

void fill_channel(const FamilyLayout& layout, std::size_t card_a, std::size_t card_b,
                  std::span<const std::uint32_t> counts, std::size_t grid, AuxChannel& ch) {
  const std::size_t cells = card_a * card_b;
  if (ch.inputs != layout.inputs) ch.inputs = layout.inputs;
  const bool same_outputs =
      layout.two_outputs
          ? ch.outputs.size() == 2 && ch.outputs[0].size == card_a && ch.outputs[1].size == card_b
          : ch.outputs.size() == 1 && ch.outputs[0].size == card_a;
  if (!same_outputs) ch.outputs = output_alphabets(layout, card_a, card_b);
  ch.kernel.assign(layout.rows * cells, 0.0);
  const double g = static_cast<double>(grid);
  for (std::size_t s = 0; s < layout.support.size(); ++s) {
    double* row = ch.kernel.data() + layout.support[s] * cells;
    for (std::size_t j = 0; j < cells; ++j) row[j] = static_cast<double>(counts[s * cells + j]) / g;
  }
  // Rows outside the support are a point mass on the first symbol.
  std::size_t s = 0;
  for (std::size_t r = 0; r < layout.rows; ++r) {
    if (s < layout.support.size() && layout.support[s] == r) {
      ++s;
    } else {
      ch.kernel[r * cells] = 1.0;
    }
  }
}

AuxChannel to_channel(const FamilyLayout& layout, std::size_t card_a, std::size_t card_b,
                      std::span<const std::uint32_t> counts, std::size_t grid) {
  AuxChannel ch;
  fill_channel(layout, card_a, card_b, counts, grid, ch);
  return ch;
}

AuxChannel to_channel(const FamilyLayout& layout, std::size_t card_a, std::size_t card_b,
                      std::span<const double> support_kernel) {
  const std::size_t cells = card_a * card_b;
  AuxChannel ch{layout.inputs, output_alphabets(layout, card_a, card_b),
                std::vector<double>(layout.rows * cells, 0.0)};
  std::vector<bool> filled(layout.rows, false);
  for (std::size_t s = 0; s < layout.support.size(); ++s) {
    const std::size_t r = layout.support[s];
    std::copy_n(support_kernel.begin() + static_cast<std::ptrdiff_t>(s * cells), cells,
                ch.kernel.begin() + static_cast<std::ptrdiff_t>(r * cells));
    filled[r] = true;
  }
  for (std::size_t r = 0; r < layout.rows; ++r) {
    if (!filled[r]) ch.kernel[r * cells] = 1.0;
  }
  return ch;
}

std::vector<double> support_kernel(const FamilyLayout& layout, const AuxChannel& ch) {
  const std::size_t cells = ch.row_size();
  std::vector<double> out;
  out.reserve(layout.support.size() * cells);
  for (std::size_t r : layout.support) {
    const auto row = ch.row(r);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

HalfspaceRegion evaluate(const FamilyLayout& layout, const AuxChannel& ch) {
  const JointPMF joint = attach_channel(layout.base, ch);
  switch (layout.family) {
    case BoundFamily::gw: return gw_region(joint);
    case BoundFamily::inner: return inner_region(joint, Checks::trusted);
    case BoundFamily::outer: return outer_region(joint, Checks::trusted);
    case BoundFamily::star: return star_region(joint, Checks::trusted);
    case BoundFamily::starstar: return starstar_region(joint, Checks::trusted);
  }
  throw std::invalid_argument("unknown family");
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GWSI_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace detail

EnumerationStats enumerate_channels(const JointPMF& source, BoundFamily family,
                                    const SearchConfig& cfg,
                                    const std::function<bool(const AuxChannel&)>& visit) {
  validate_config(cfg, source, family);
  const auto layout = detail::make_layout(source, family);
  const auto caps = resolve_caps(cfg, source, family);
  EnumerationStats stats;
  for (const auto& [ka, kb] : detail::cardinality_pairs(caps, layout.two_outputs)) {
    const std::size_t g =
        detail::effective_grid(layout.support.size(), ka, kb, cfg.grid, cfg.budget);
    stats.grids.push_back({ka, kb, g});
    AuxChannel ch;
    const bool done = detail::for_each_grid_kernel(
        layout.support.size(), ka, kb, g, [&](std::span<const std::uint32_t> counts) {
          ++stats.channels;
          detail::fill_channel(layout, ka, kb, counts, g, ch);
          return visit(ch);
        });
    if (!done) break;
  }
  return stats;
}

HalfspaceRegion family_region(const JointPMF& source, BoundFamily family, const AuxChannel& ch) {
  const auto layout = detail::make_layout(source, family);
  return detail::evaluate(layout, ch);
}

std::string channel_id(const AuxChannel& ch) {
  std::ostringstream os;
  os.precision(6);
  for (std::size_t i = 0; i < ch.outputs.size(); ++i) {
    os << to_string(ch.outputs[i].name) << ch.outputs[i].size;
  }
  os << ':';
  for (std::size_t r = 0; r < ch.rows(); ++r) {
    if (r) os << ';';
    const auto row = ch.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) os << '/';
      os << row[j];
    }
  }
  return os.str();
}

}  // namespace gwsi
