#pragma once

// Optimisation over auxiliary channels: grid enumeration of kernels, exact
// scalarised minimisation over each per-channel region, membership tests for
// the union regions, and the closed-form special cases they are checked
// against.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gwsi/measures.hpp"
#include "gwsi/regions.hpp"

namespace gwsi {

enum class BoundFamily { gw, inner, outer, star, starstar };

std::string_view to_string(BoundFamily f) noexcept;
BoundFamily family_from_string(std::string_view name);

struct SearchConfig {
  /// Caps on auxiliary cardinalities; 0 selects the family's default cap
  /// (|X||Y|+3 for W, |X|+1 for the X=Y pair, |X||Y|+1 for the
  /// complementary-delivery pair).
  std::size_t w_card = 0;
  std::size_t a_card = 0;
  std::size_t b_card = 0;
  /// Kernel rows are pmfs with numerators summing to `grid`.
  std::size_t grid = 8;
  std::size_t refine_iters = 0;
  std::uint64_t seed = 0;
  /// Work cap per auxiliary cardinality. A cardinality whose grid exceeds it
  /// is searched on the largest grid / 2^j that fits (deterministic kernels
  /// as the last resort). 0 means unlimited.
  std::uint64_t budget = 250'000;
  /// Allow caps above the stated cardinality bounds.
  bool override_caps = false;
  /// Agreement tolerance used by `check_special_case`.
  double tolerance = 1e-3;
  /// Worker threads; 0 reads GWSI_THREADS, then falls back to the hardware.
  std::size_t threads = 0;
};

/// Throws std::invalid_argument when the configuration is unusable for this
/// source and family.
void validate_config(const SearchConfig& cfg, const JointPMF& source, BoundFamily family);

/// Resolved cardinality caps (|W| for single-auxiliary families, |A| and |B|
/// otherwise).
struct CardinalityCaps {
  std::size_t first;
  std::size_t second;  // 1 for single-auxiliary families
};
CardinalityCaps resolve_caps(const SearchConfig& cfg, const JointPMF& source, BoundFamily family);

/// Grid actually used for one auxiliary cardinality.
struct GridUse {
  std::size_t card_a;
  std::size_t card_b;
  std::size_t grid;
};

struct EnumerationStats {
  std::uint64_t channels = 0;
  std::vector<GridUse> grids;
};

/// Visits every grid kernel of the family, deduplicated up to relabelling of
/// the auxiliary symbols (kernels that leave a symbol unused are represented
/// at the smaller cardinality). Rows for zero-probability inputs are fixed to
/// a point mass on the first symbol. The visitor returns false to stop early.
EnumerationStats enumerate_channels(const JointPMF& source, BoundFamily family,
                                    const SearchConfig& cfg,
                                    const std::function<bool(const AuxChannel&)>& visit);

/// Source marginal the family's channel is attached to.
JointPMF family_base(const JointPMF& source, BoundFamily family);

/// Region of `family` for the joint obtained by attaching `ch` to the source.
HalfspaceRegion family_region(const JointPMF& source, BoundFamily family, const AuxChannel& ch);

using Weights = std::array<double, 3>;

struct SupportPoint {
  double value;
  RateTriple point;
};

/// min lambda.R over the region intersected with the nonnegative octant.
/// Components with zero weight are reported at their smallest feasible value;
/// among optimal points the one with the smallest R0 is returned.
SupportPoint support_value(const HalfspaceRegion& region, const Weights& weights);

struct WeightedMin {
  double value;
  AuxChannel channel;
  RateTriple point;
  EnumerationStats stats;
};

WeightedMin min_weighted(const JointPMF& source, BoundFamily family, const Weights& weights,
                         const SearchConfig& cfg);

struct SweepRow {
  Weights weights;
  double value;
  RateTriple point;
  AuxChannel channel;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

SweepResult sweep_boundary(const JointPMF& source, BoundFamily family,
                           const std::vector<Weights>& weight_list, const SearchConfig& cfg);

/// One-sided membership: true iff some enumerated (or refined) channel's
/// region contains `t`.
bool member(const JointPMF& source, BoundFamily family, const RateTriple& t,
            const SearchConfig& cfg);

enum class SumRateCase { markov, sgarro, compdel };
std::string_view to_string(SumRateCase c) noexcept;
SumRateCase sum_rate_case_from_string(std::string_view name);

/// Known minimal sum rates:
///   markov  ((X,Y)-U-V):  H(Y|V) + H(X|Y,U)
///   sgarro  (X = Y):      max{H(X|U), H(X|V)}
///   compdel (U=Y, V=X):   max{H(X|Y), H(Y|X)}
/// Throws std::domain_error when the structural condition fails.
double closed_form_sum_rate(SumRateCase c, const JointPMF& source);

/// Structural predicates, evaluated to within 1e-9 bits.
bool same_variable(const JointPMF& source, Var a, Var b);
bool is_function_of(const JointPMF& source, Var of, Var by);
bool markov_xy_u_v(const JointPMF& source);

enum class Theorem { xy_equal, degraded, compdel, star, starstar };
std::string_view to_string(Theorem t) noexcept;
Theorem theorem_from_string(std::string_view name);

struct CheckRow {
  Weights weights;
  /// (label, value) pairs, e.g. ("OUTER", 0.81).
  std::vector<std::pair<std::string, double>> values;
  double max_gap;
  bool pass;
};

struct SpecialCaseReport {
  Theorem theorem;
  std::string hypothesis;
  std::size_t grid;
  double tolerance;
  std::vector<CheckRow> rows;
  bool pass;
};

/// Evaluates the outer, inner and (where the theorem has one) two-auxiliary
/// descriptions together with the closed-form sum rate at weights (1,1,1),
/// then compares the exact descriptions at every extra weight vector.
/// Throws std::domain_error naming the failed hypothesis.
SpecialCaseReport check_special_case(Theorem theorem, const JointPMF& source,
                                     const SearchConfig& cfg,
                                     const std::vector<Weights>& extra_weights = {});

/// Compact textual identifier for a kernel, e.g. "W2:1/0;0.5/0.5".
std::string channel_id(const AuxChannel& ch);

}  // namespace gwsi
