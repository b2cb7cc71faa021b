#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "gwsi/search.hpp"

namespace gwsi {

namespace {

constexpr double kStructureTolerance = 1e-9;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::domain_error("hypothesis violated: " + what);
}

void require_xy_equal(const JointPMF& s) { require(same_variable(s, Var::X, Var::Y), "X = Y"); }

void require_compdel(const JointPMF& s) {
  require(same_variable(s, Var::U, Var::Y), "U = Y");
  require(same_variable(s, Var::V, Var::X), "V = X");
}

void require_degraded(const JointPMF& s) {
  require(is_function_of(s, Var::X, Var::Y), "Y = (X,Z), i.e. X is a function of Y");
  require(markov_xy_u_v(s), "(X,Z) - U - V Markov chain");
}

double max_gap(const std::vector<std::pair<std::string, double>>& values) {
  double lo = values.front().second, hi = lo;
  for (const auto& [label, v] : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

}  // namespace

std::string_view to_string(SumRateCase c) noexcept {
  switch (c) {
    case SumRateCase::markov: return "markov";
    case SumRateCase::sgarro: return "sgarro";
    case SumRateCase::compdel: return "compdel";
  }
  return "?";
}

SumRateCase sum_rate_case_from_string(std::string_view name) {
  for (auto c : {SumRateCase::markov, SumRateCase::sgarro, SumRateCase::compdel}) {
    if (to_string(c) == name) return c;
  }
  throw std::invalid_argument("unknown sum-rate case '" + std::string(name) + "'");
}

double closed_form_sum_rate(SumRateCase c, const JointPMF& source) {
  const VarSet x{Var::X}, y{Var::Y}, u{Var::U}, v{Var::V};
  if (!(x | y | u | v).subset_of(source.var_set())) {
    throw std::invalid_argument("closed_form_sum_rate needs a source over X,Y,U,V");
  }
  switch (c) {
    case SumRateCase::markov: {
      const double leak = cond_mutual_info(source, x | y, v, u);
      if (leak > kStructureTolerance) {
        throw std::domain_error("markov case needs (X,Y) - U - V; I(X,Y;V|U) = " +
                                std::to_string(leak));
      }
      return cond_entropy(source, y, v) + cond_entropy(source, x, y | u);
    }
    case SumRateCase::sgarro:
      if (!same_variable(source, Var::X, Var::Y)) {
        throw std::domain_error("sgarro case needs X = Y");
      }
      return std::max(cond_entropy(source, x, u), cond_entropy(source, x, v));
    case SumRateCase::compdel:
      if (!same_variable(source, Var::U, Var::Y) || !same_variable(source, Var::V, Var::X)) {
        throw std::domain_error("compdel case needs U = Y and V = X");
      }
      return std::max(cond_entropy(source, x, y), cond_entropy(source, y, x));
  }
  throw std::invalid_argument("unknown sum-rate case");
}

std::string_view to_string(Theorem t) noexcept {
  switch (t) {
    case Theorem::xy_equal: return "xy-equal";
    case Theorem::degraded: return "degraded";
    case Theorem::compdel: return "compdel";
    case Theorem::star: return "star";
    case Theorem::starstar: return "starstar";
  }
  return "?";
}

Theorem theorem_from_string(std::string_view name) {
  for (auto t : {Theorem::xy_equal, Theorem::degraded, Theorem::compdel, Theorem::star,
                 Theorem::starstar}) {
    if (to_string(t) == name) return t;
  }
  if (name == "xy_equal") return Theorem::xy_equal;
  throw std::invalid_argument("unknown special case '" + std::string(name) + "'");
}

SpecialCaseReport check_special_case(Theorem theorem, const JointPMF& source,
                                     const SearchConfig& cfg,
                                     const std::vector<Weights>& extra_weights) {
  SpecialCaseReport report{theorem, "", cfg.grid, cfg.tolerance, {}, true};
  std::optional<BoundFamily> alternate;
  std::optional<SumRateCase> closed;
  switch (theorem) {
    case Theorem::xy_equal:
    case Theorem::star:
      require_xy_equal(source);
      report.hypothesis = "X = Y";
      alternate = BoundFamily::star;
      closed = SumRateCase::sgarro;
      break;
    case Theorem::degraded:
      require_degraded(source);
      report.hypothesis = "Y = (X,Z) and (X,Z) - U - V";
      closed = SumRateCase::markov;
      break;
    case Theorem::compdel:
    case Theorem::starstar:
      require_compdel(source);
      report.hypothesis = "U = Y and V = X";
      alternate = BoundFamily::starstar;
      closed = SumRateCase::compdel;
      break;
  }

  // Sum rate: every description, plus the closed form, must agree.
  {
    const Weights ones{1.0, 1.0, 1.0};
    CheckRow row{ones, {}, 0.0, true};
    row.values.emplace_back("OUTER", min_weighted(source, BoundFamily::outer, ones, cfg).value);
    row.values.emplace_back("INNER", min_weighted(source, BoundFamily::inner, ones, cfg).value);
    if (alternate) {
      row.values.emplace_back(alternate == BoundFamily::star ? "STAR" : "STARSTAR",
                              min_weighted(source, *alternate, ones, cfg).value);
    }
    if (closed) {
      std::string label(to_string(*closed));
      std::transform(label.begin(), label.end(), label.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
      row.values.emplace_back(label, closed_form_sum_rate(*closed, source));
    }
    row.max_gap = max_gap(row.values);
    row.pass = row.max_gap <= cfg.tolerance;
    report.pass = report.pass && row.pass;
    report.rows.push_back(std::move(row));
  }

  // Other weights: the exact descriptions must agree, and the inner bound
  // may not undercut the outer one.
  for (const auto& w : extra_weights) {
    CheckRow row{w, {}, 0.0, true};
    const double outer = min_weighted(source, BoundFamily::outer, w, cfg).value;
    const double inner = min_weighted(source, BoundFamily::inner, w, cfg).value;
    row.values.emplace_back("OUTER", outer);
    row.values.emplace_back("INNER", inner);
    bool ok = outer <= inner + cfg.tolerance;
    if (alternate) {
      const double alt = min_weighted(source, *alternate, w, cfg).value;
      row.values.emplace_back(alternate == BoundFamily::star ? "STAR" : "STARSTAR", alt);
      row.max_gap = std::abs(alt - outer);
      ok = ok && row.max_gap <= cfg.tolerance;
    } else {
      row.max_gap = std::max(0.0, outer - inner);
    }
    row.pass = ok;
    report.pass = report.pass && ok;
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace gwsi
