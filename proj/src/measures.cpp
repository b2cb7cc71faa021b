#include "gwsi/measures.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gwsi/simd.hpp"

namespace gwsi {

namespace {

constexpr std::array<std::string_view, kVarCount> kVarNames{"X", "Y", "U", "V", "W", "A", "B"};

constexpr double kInputTolerance = 1e-12;

std::string format_index(std::span<const std::size_t> idx) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) os << ',';
    os << idx[i];
  }
  os << ')';
  return os.str();
}

std::vector<std::size_t> unravel(std::size_t flat, const std::vector<Alphabet>& vars) {
  std::vector<std::size_t> idx(vars.size());
  for (std::size_t a = vars.size(); a-- > 0;) {
    idx[a] = flat % vars[a].size;
    flat /= vars[a].size;
  }
  return idx;
}

// Marginalisation plan: singleton axes are dropped and runs of adjacent axes
// that are all kept (or all summed out) are fused, so the common cases reduce
// to one or two flat loops.
// Left uninitialised on purpose: plans are built in hot loops and only the
// first `axes` entries are ever read.
struct MarginalPlan {
  std::array<std::size_t, kVarCount> dims;
  std::array<bool, kVarCount> kept;
  std::size_t axes;
  std::size_t out_size;
  bool summed;  // some axis of size > 1 is summed out
};

MarginalPlan make_plan(const JointPMF& pmf, VarSet keep) {
  MarginalPlan plan;
  plan.axes = 0;
  plan.out_size = 1;
  plan.summed = false;
  for (const auto& a : pmf.vars()) {
    if (a.size == 1) continue;
    const bool k = keep.contains(a.name);
    if (k) plan.out_size *= a.size;
    plan.summed = plan.summed || !k;
    if (plan.axes > 0 && plan.kept[plan.axes - 1] == k) {
      plan.dims[plan.axes - 1] *= a.size;
    } else {
      plan.dims[plan.axes] = a.size;
      plan.kept[plan.axes] = k;
      ++plan.axes;
    }
  }
  return plan;
}

// Accumulates the marginal of `pmf` described by `plan` into `out`, which
// must hold plan.out_size entries.
void marginal_into(const JointPMF& pmf, const MarginalPlan& plan, std::span<double> out) {
  const auto probs = pmf.probs();
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t m = plan.axes;
  if (!plan.summed) {
    std::copy(probs.begin(), probs.end(), out.begin());
    return;
  }
  if (m == 1) {  // everything summed out
    out[0] = simd::sum(probs);
    return;
  }
  if (m == 2) {
    const std::size_t d0 = plan.dims[0], d1 = plan.dims[1];
    if (plan.kept[0]) {
      for (std::size_t i = 0; i < d0; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d1; ++j) acc += probs[i * d1 + j];
        out[i] = acc;
      }
    } else {
      for (std::size_t i = 0; i < d0; ++i) {
        for (std::size_t j = 0; j < d1; ++j) out[j] += probs[i * d1 + j];
      }
    }
    return;
  }

  std::array<std::size_t, kVarCount> ostride{};
  std::size_t acc_stride = 1;
  for (std::size_t a = m; a-- > 0;) {
    ostride[a] = plan.kept[a] ? acc_stride : 0;
    if (plan.kept[a]) acc_stride *= plan.dims[a];
  }
  const std::size_t inner = plan.dims[m - 1];
  const std::size_t inner_stride = ostride[m - 1];
  std::array<std::size_t, kVarCount> idx{};
  std::size_t off = 0;
  for (std::size_t base = 0; base < probs.size(); base += inner) {
    if (inner_stride == 0) {
      double acc = 0.0;
      for (std::size_t j = 0; j < inner; ++j) acc += probs[base + j];
      out[off] += acc;
    } else {
      for (std::size_t j = 0; j < inner; ++j) out[off + j] += probs[base + j];
    }
    for (std::size_t a = m - 1; a-- > 0;) {
      ++idx[a];
      off += ostride[a];
      if (idx[a] < plan.dims[a]) break;
      off -= ostride[a] * plan.dims[a];
      idx[a] = 0;
    }
  }
}

void require_subset(const JointPMF& pmf, VarSet s, const char* what) {
  if (!s.subset_of(pmf.var_set())) {
    throw std::invalid_argument(std::string(what) + ": variables " + s.to_string() +
                                " not all present in " + pmf.var_set().to_string());
  }
}

void require_disjoint(VarSet a, VarSet b, const char* what) {
  if (a.intersects(b)) {
    throw std::invalid_argument(std::string(what) + ": variable sets " + a.to_string() + " and " +
                                b.to_string() + " overlap");
  }
}

}  // namespace

std::string_view to_string(Var v) noexcept { return kVarNames[static_cast<std::size_t>(v)]; }

Var var_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kVarNames.size(); ++i) {
    if (kVarNames[i] == name) return static_cast<Var>(i);
  }
  throw std::invalid_argument("unknown variable '" + std::string(name) + "'");
}

std::size_t VarSet::size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }

std::string VarSet::to_string() const {
  std::string s = "{";
  bool first = true;
  for (std::size_t i = 0; i < kVarCount; ++i) {
    if (contains(static_cast<Var>(i))) {
      if (!first) s += ',';
      s += kVarNames[i];
      first = false;
    }
  }
  return s + "}";
}

JointPMF::JointPMF(std::vector<Alphabet> vars, std::vector<double> probs)
    : vars_(std::move(vars)), probs_(std::move(probs)) {
  std::size_t expected = 1;
  for (const auto& a : vars_) {
    if (a.size == 0) {
      throw std::invalid_argument("alphabet " + std::string(gwsi::to_string(a.name)) +
                                  " has size 0");
    }
    if (set_.contains(a.name)) {
      throw std::invalid_argument("duplicate variable " + std::string(gwsi::to_string(a.name)));
    }
    set_ = set_ | VarSet{a.name};
    expected *= a.size;
  }
  if (probs_.size() != expected) {
    throw std::invalid_argument("tensor has " + std::to_string(probs_.size()) +
                                " entries, alphabets require " + std::to_string(expected));
  }
}

std::size_t JointPMF::axis(Var v) const {
  for (std::size_t a = 0; a < vars_.size(); ++a) {
    if (vars_[a].name == v) return a;
  }
  throw std::invalid_argument("variable " + std::string(gwsi::to_string(v)) + " not in pmf " +
                              set_.to_string());
}

std::vector<std::size_t> JointPMF::strides() const {
  std::vector<std::size_t> s(vars_.size());
  std::size_t acc = 1;
  for (std::size_t a = vars_.size(); a-- > 0;) {
    s[a] = acc;
    acc *= vars_[a].size;
  }
  return s;
}

std::size_t JointPMF::offset(std::span<const std::size_t> index) const {
  if (index.size() != vars_.size()) throw std::invalid_argument("index rank mismatch");
  std::size_t off = 0;
  for (std::size_t a = 0; a < vars_.size(); ++a) {
    if (index[a] >= vars_[a].size) throw std::out_of_range("index out of range");
    off = off * vars_[a].size + index[a];
  }
  return off;
}

double JointPMF::at(std::span<const std::size_t> index) const { return probs_[offset(index)]; }

std::optional<std::string> validate_pmf(const JointPMF& pmf) {
  const auto probs = pmf.probs();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!std::isfinite(probs[i])) {
      return "non-finite entry at " + format_index(unravel(i, pmf.vars()));
    }
    if (probs[i] < 0.0) return "negative entry at " + format_index(unravel(i, pmf.vars()));
  }
  const double mass = simd::sum(probs);
  if (std::fabs(mass - 1.0) > kInputTolerance) {
    std::ostringstream os;
    os.precision(12);
    os << "mass " << mass << " != 1";
    return os.str();
  }
  return std::nullopt;
}

JointPMF marginal(const JointPMF& pmf, VarSet keep) {
  require_subset(pmf, keep, "marginal");
  std::vector<Alphabet> vars;
  for (const auto& a : pmf.vars()) {
    if (keep.contains(a.name)) vars.push_back(a);
  }
  const MarginalPlan plan = make_plan(pmf, keep);
  std::vector<double> out(plan.out_size);
  marginal_into(pmf, plan, out);
  return JointPMF(std::move(vars), std::move(out));
}

std::size_t AuxChannel::rows() const noexcept {
  std::size_t r = 1;
  for (const auto& a : inputs) r *= a.size;
  return r;
}

std::size_t AuxChannel::row_size() const noexcept {
  std::size_t r = 1;
  for (const auto& a : outputs) r *= a.size;
  return r;
}

std::optional<std::string> validate_channel(const AuxChannel& ch) {
  if (ch.outputs.empty()) return "channel has no output variable";
  const std::size_t rows = ch.rows(), width = ch.row_size();
  if (ch.kernel.size() != rows * width) {
    return "kernel has " + std::to_string(ch.kernel.size()) + " entries, expected " +
           std::to_string(rows * width);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = std::span<const double>(ch.kernel).subspan(r * width, width);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!(row[j] >= 0.0)) {
        return "negative kernel entry at row " + std::to_string(r) + ", column " +
               std::to_string(j);
      }
    }
    double mass = 0.0;
    if (width < 8) {
      for (double p : row) mass += p;
    } else {
      mass = simd::sum(row);
    }
    if (std::fabs(mass - 1.0) > kInputTolerance) {
      std::ostringstream os;
      os.precision(12);
      os << "kernel row " << r << " has mass " << mass << " != 1";
      return os.str();
    }
  }
  return std::nullopt;
}

JointPMF attach_channel(const JointPMF& base, const AuxChannel& ch) {
  if (auto bad = validate_channel(ch)) throw std::invalid_argument("attach_channel: " + *bad);
  const auto& bvars = base.vars();
  if (ch.inputs.size() > kVarCount) throw std::invalid_argument("attach_channel: too many inputs");
  std::array<std::size_t, kVarCount> in_axes{};
  std::size_t n_in = 0;
  for (const auto& in : ch.inputs) {
    if (!base.has(in.name) || base.card(in.name) != in.size) {
      throw std::invalid_argument("attach_channel: channel input " +
                                  std::string(to_string(in.name)) +
                                  " missing from base or of different cardinality");
    }
    in_axes[n_in++] = base.axis(in.name);
  }
  for (const auto& out : ch.outputs) {
    if (base.has(out.name)) {
      throw std::invalid_argument("attach_channel: output " + std::string(to_string(out.name)) +
                                  " already present in base");
    }
  }

  std::vector<Alphabet> vars = ch.outputs;
  vars.insert(vars.end(), bvars.begin(), bvars.end());
  const std::size_t bsize = base.size();
  const std::size_t osize = ch.row_size();
  std::vector<double> probs(osize * bsize);
  const auto bp = base.probs();

  // Fast path: the inputs are the leading base axes in channel order, so each
  // kernel row multiplies one contiguous block of the base tensor.
  bool leading = true;
  for (std::size_t i = 0; i < n_in; ++i) leading = leading && in_axes[i] == i;
  if (leading) {
    const std::size_t rows = ch.rows();
    const std::size_t block = bsize / rows;
    for (std::size_t r = 0; r < rows; ++r) {
      const auto src = bp.subspan(r * block, block);
      const auto row = std::span<const double>(ch.kernel).subspan(r * osize, osize);
      for (std::size_t o = 0; o < osize; ++o) {
        double* dst = probs.data() + o * bsize + r * block;
        if (block < 8) {
          // Too short to repay the dispatch.
          for (std::size_t k = 0; k < block; ++k) dst[k] = src[k] * row[o];
        } else {
          simd::scale(src, row[o], std::span<double>(dst, block));
        }
      }
    }
  } else {
    const auto bstrides = base.strides();
    for (std::size_t b = 0; b < bsize; ++b) {
      std::size_t r = 0;
      for (std::size_t i = 0; i < n_in; ++i) {
        const std::size_t ax = in_axes[i];
        r = r * ch.inputs[i].size + (b / bstrides[ax]) % bvars[ax].size;
      }
      const auto row = ch.row(r);
      for (std::size_t o = 0; o < osize; ++o) probs[o * bsize + b] = row[o] * bp[b];
    }
  }
  return JointPMF(std::move(vars), std::move(probs));
}

namespace {

// Cell of every joint entry in the marginal on a variable set. Search loops
// evaluate millions of joints of one shape, so the maps are cached per
// thread, keyed by the shape and the set.
struct ShapeKey {
  std::uint64_t lo = 0, hi = 0;
  bool operator==(const ShapeKey&) const = default;
};

// Axis names and sizes packed 16 bits per axis. Only used below
// kCellMapMaxEntries, so every size fits in 13 bits.
ShapeKey shape_key(const JointPMF& pmf) {
  ShapeKey k;
  const auto& vars = pmf.vars();
  for (std::size_t a = 0; a < vars.size(); ++a) {
    const std::uint64_t code = (static_cast<std::uint64_t>(vars[a].size) << 3) |
                               static_cast<std::uint64_t>(vars[a].name);
    if (a < 4) {
      k.lo |= code << (16 * a);
    } else {
      k.hi |= code << (16 * (a - 4));
    }
  }
  return k;
}

struct CellMap {
  ShapeKey shape;
  std::uint8_t set = 0;
  std::vector<std::uint32_t> cell;
  std::size_t out_size = 0;
  bool valid = false;
};

constexpr std::size_t kCellMapSlots = 64;
constexpr std::size_t kCellMapMaxEntries = 1 << 12;

const CellMap& cell_map(const JointPMF& pmf, const ShapeKey& shape, VarSet set) {
  thread_local std::array<CellMap, kCellMapSlots> cache;
  std::uint64_t h = (shape.lo ^ (shape.hi * 0x9e3779b97f4a7c15ULL)) * 0xff51afd7ed558ccdULL;
  h ^= set.bits() * 0xc4ceb9fe1a85ec53ULL;
  CellMap& slot = cache[(h >> 40) % kCellMapSlots];
  if (slot.valid && slot.set == set.bits() && slot.shape == shape) return slot;

  const auto& vars = pmf.vars();
  slot.shape = shape;
  slot.set = set.bits();
  slot.cell.resize(pmf.size());
  std::array<std::size_t, kVarCount> ostride{};
  std::size_t acc = 1;
  for (std::size_t a = vars.size(); a-- > 0;) {
    if (set.contains(vars[a].name)) {
      ostride[a] = acc;
      acc *= vars[a].size;
    }
  }
  slot.out_size = acc;
  std::array<std::size_t, kVarCount> idx{};
  std::size_t off = 0;
  for (std::size_t e = 0; e < pmf.size(); ++e) {
    slot.cell[e] = static_cast<std::uint32_t>(off);
    for (std::size_t a = vars.size(); a-- > 0;) {
      off += ostride[a];
      if (++idx[a] < vars[a].size) break;
      off -= ostride[a] * vars[a].size;
      idx[a] = 0;
    }
  }
  slot.valid = true;
  return slot;
}

double entropy_of_buffer(std::span<double> buf) {
  simd::neg_plogp(buf, buf);
  double h = 0.0;
  for (double v : buf) h += v;
  return h;
}

}  // namespace

void entropies(const JointPMF& pmf, std::span<const VarSet> sets, std::span<double> out) {
  if (out.size() != sets.size()) throw std::invalid_argument("entropies: output size mismatch");
  for (VarSet s : sets) require_subset(pmf, s, "entropy");
  const auto probs = pmf.probs();

  if (pmf.size() > kCellMapMaxEntries) {
    std::vector<double> buf;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const MarginalPlan plan = make_plan(pmf, sets[i]);
      if (plan.out_size == 1) {
        out[i] = 0.0;
        continue;
      }
      buf.resize(plan.out_size);
      marginal_into(pmf, plan, buf);
      out[i] = entropy_of_buffer(buf);
    }
    return;
  }

  const ShapeKey shape = shape_key(pmf);
  // Marginals are packed into one buffer so that a single vector pass takes
  // all the logarithms. Cells are summed in joint-index order whichever way
  // a set is requested, so results are bit-identical across call patterns.
  constexpr std::size_t kStack = 2048;
  std::array<double, kStack> stack_buf;
  std::vector<double> heap_buf;
  std::array<std::size_t, 16> sizes;
  std::size_t first = 0;
  while (first < sets.size()) {
    std::size_t count = 0, total = 0;
    std::span<double> buf(stack_buf.data(), kStack);
    for (; first + count < sets.size() && count < sizes.size(); ++count) {
      const CellMap& m = cell_map(pmf, shape, sets[first + count]);
      if (total + m.out_size > kStack) {
        if (count > 0) break;
        heap_buf.assign(m.out_size, 0.0);
        buf = heap_buf;
      }
      const auto seg = buf.subspan(total, m.out_size);
      std::fill(seg.begin(), seg.end(), 0.0);
      const std::uint32_t* cell = m.cell.data();
      for (std::size_t e = 0; e < probs.size(); ++e) seg[cell[e]] += probs[e];
      sizes[count] = m.out_size;
      total += m.out_size;
    }
    const auto used = buf.subspan(0, total);
    simd::neg_plogp(used, used);
    std::size_t start = 0;
    for (std::size_t k = 0; k < count; ++k) {
      double h = 0.0;
      // A point-mass marginal is exactly 0 bits.
      if (sizes[k] > 1) {
        for (std::size_t j = 0; j < sizes[k]; ++j) h += used[start + j];
      }
      out[first + k] = h;
      start += sizes[k];
    }
    first += count;
  }
}

double entropy(const JointPMF& pmf, VarSet vars) {
  double h = 0.0;
  entropies(pmf, std::span<const VarSet>(&vars, 1), std::span<double>(&h, 1));
  return h;
}

double cond_entropy(const JointPMF& pmf, VarSet a, VarSet b) {
  require_disjoint(a, b, "cond_entropy");
  return entropy(pmf, a | b) - entropy(pmf, b);
}

double mutual_info(const JointPMF& pmf, VarSet a, VarSet b) {
  require_disjoint(a, b, "mutual_info");
  return entropy(pmf, a) + entropy(pmf, b) - entropy(pmf, a | b);
}

double cond_mutual_info(const JointPMF& pmf, VarSet a, VarSet b, VarSet c) {
  require_disjoint(a, b, "cond_mutual_info");
  require_disjoint(a, c, "cond_mutual_info");
  require_disjoint(b, c, "cond_mutual_info");
  return entropy(pmf, a | c) + entropy(pmf, b | c) - entropy(pmf, a | b | c) - entropy(pmf, c);
}

}  // namespace gwsi
