#pragma once

// Reference computations written directly from the definitions, sharing no
// code with the library: every entropy is a fresh sum over a marginal built
// by decoding indices one entry at a time.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

inline double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// A pmf over named axes, row-major, first axis slowest.
struct Table {
  std::vector<char> names;
  std::vector<std::size_t> sizes;
  std::vector<double> p;

  std::vector<std::size_t> decode(std::size_t flat) const {
    std::vector<std::size_t> idx(sizes.size());
    for (std::size_t a = sizes.size(); a-- > 0;) {
      idx[a] = flat % sizes[a];
      flat /= sizes[a];
    }
    return idx;
  }
};

/// Entropy in bits of the marginal on the axes named in `keep`.
inline double H(const Table& t, const std::string& keep) {
  std::map<std::vector<std::size_t>, double> m;
  for (std::size_t e = 0; e < t.p.size(); ++e) {
    const auto idx = t.decode(e);
    std::vector<std::size_t> key;
    for (std::size_t a = 0; a < t.names.size(); ++a) {
      if (keep.find(t.names[a]) != std::string::npos) key.push_back(idx[a]);
    }
    m[key] += t.p[e];
  }
  double h = 0.0;
  for (const auto& [k, v] : m) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

inline double Hc(const Table& t, const std::string& a, const std::string& given) {
  return H(t, a + given) - H(t, given);
}

inline double I(const Table& t, const std::string& a, const std::string& b) {
  return H(t, a) + H(t, b) - H(t, a + b);
}

inline double Ic(const Table& t, const std::string& a, const std::string& b, const std::string& c) {
  return H(t, a + c) + H(t, b + c) - H(t, a + b + c) - H(t, c);
}

/// Multiplies a base table by a channel p(out | inputs); the output axis goes
/// in front, matching the library's layout convention.
inline Table attach(const Table& base, const std::vector<char>& inputs, char out, std::size_t card,
                    const std::vector<double>& kernel) {
  Table t;
  t.names = {out};
  t.names.insert(t.names.end(), base.names.begin(), base.names.end());
  t.sizes = {card};
  t.sizes.insert(t.sizes.end(), base.sizes.begin(), base.sizes.end());
  t.p.assign(card * base.p.size(), 0.0);
  for (std::size_t b = 0; b < base.p.size(); ++b) {
    const auto idx = base.decode(b);
    std::size_t row = 0;
    for (char in : inputs) {
      const auto a = static_cast<std::size_t>(
          std::find(base.names.begin(), base.names.end(), in) - base.names.begin());
      row = row * base.sizes[a] + idx[a];
    }
    for (std::size_t w = 0; w < card; ++w) {
      t.p[w * base.p.size() + b] = kernel[row * card + w] * base.p[b];
    }
  }
  return t;
}

inline std::vector<double> random_pmf(std::mt19937_64& g, std::size_t n, double zero_prob = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& v : p) {
    v = u(g) < zero_prob ? 0.0 : -std::log(1.0 - u(g));
    s += v;
  }
  if (s == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (auto& v : p) v /= s;
  return p;
}

/// Number of grid kernels over `rows` rows with at most `max_card` used
/// symbols, counted up to relabelling: each kernel is reduced to the sorted
/// multiset of its nonzero columns.
inline std::size_t canonical_kernel_count(std::size_t rows, std::size_t max_card,
                                          std::size_t grid) {
  // All compositions of `grid` into max_card parts.
  std::vector<std::vector<std::size_t>> comps;
  std::vector<std::size_t> cur(max_card, 0);
  auto rec = [&](auto&& self, std::size_t pos, std::size_t left) -> void {
    if (pos + 1 == max_card) {
      cur[pos] = left;
      comps.push_back(cur);
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      cur[pos] = v;
      self(self, pos + 1, left - v);
    }
  };
  rec(rec, 0, grid);

  std::set<std::vector<std::vector<std::size_t>>> seen;
  std::vector<std::size_t> pick(rows, 0);
  while (true) {
    std::vector<std::vector<std::size_t>> cols;
    for (std::size_t w = 0; w < max_card; ++w) {
      std::vector<std::size_t> col(rows);
      bool used = false;
      for (std::size_t r = 0; r < rows; ++r) {
        col[r] = comps[pick[r]][w];
        used = used || col[r] > 0;
      }
      if (used) cols.push_back(col);
    }
    std::sort(cols.begin(), cols.end());
    seen.insert(cols);
    std::size_t r = 0;
    while (r < rows && ++pick[r] == comps.size()) pick[r++] = 0;
    if (r == rows) break;
  }
  return seen.size();
}

}  // namespace oracle
