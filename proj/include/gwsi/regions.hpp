#pragma once

// Per-distribution rate regions over (R0, R1, R2), each a system of at most
// three lower bounds on sums of rates.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gwsi/measures.hpp"

namespace gwsi {

/// Rates in bits per source symbol on the common channel (r0) and the two
/// private channels (r1 to the x-receiver, r2 to the y-receiver).
struct RateTriple {
  double r0 = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;

  double sum() const noexcept { return r0 + r1 + r2; }
  bool operator==(const RateTriple&) const = default;
};

/// coeffs . (R0, R1, R2) >= bound. Only the vectors (1,0,0), (0,1,0),
/// (0,0,1), (1,1,0) and (1,0,1) are admitted.
struct Halfspace {
  std::array<int, 3> coeffs;
  double bound;
};

inline constexpr std::array<int, 3> kR0{1, 0, 0};
inline constexpr std::array<int, 3> kR1{0, 1, 0};
inline constexpr std::array<int, 3> kR2{0, 0, 1};
inline constexpr std::array<int, 3> kR0R1{1, 1, 0};
inline constexpr std::array<int, 3> kR0R2{1, 0, 1};

class HalfspaceRegion {
 public:
  /// Throws std::invalid_argument on an unsupported coefficient vector or a
  /// negative bound.
  explicit HalfspaceRegion(std::vector<Halfspace> constraints);

  const std::vector<Halfspace>& constraints() const noexcept { return constraints_; }

  /// Largest bound among constraints with exactly this coefficient vector,
  /// or std::nullopt when no such constraint exists.
  std::optional<double> bound(const std::array<int, 3>& coeffs) const;

  /// The two operands of the max{.,.} in the common-rate bound, kept for
  /// diagnostics when the region was built from one.
  std::optional<std::array<double, 2>> common_operands;

 private:
  std::vector<Halfspace> constraints_;
};

/// Whether the region factory functions verify the Markov factorisation and
/// the auxiliary cardinality caps. `trusted` is for callers that built the
/// joint with `attach_channel` and sized the auxiliaries themselves.
enum class Checks { full, trusted };

/// Gray-Wyner region without side information:
/// R0 >= I(X,Y;W), R1 >= H(X|W), R2 >= H(Y|W).
HalfspaceRegion gw_region(const JointPMF& joint);

/// Inner bound with receiver side information:
/// R0 >= max{I(X,Y;W|U), I(X,Y;W|V)}, R1 >= H(X|W,U), R2 >= H(Y|W,V).
HalfspaceRegion inner_region(const JointPMF& joint, Checks checks = Checks::full);

/// Outer bound: R0 >= M, R0+R1 >= M + H(X|W,U), R0+R2 >= M + H(Y|W,V), where
/// M = max{I(X,Y;W|U), I(X,Y;W|V)}.
HalfspaceRegion outer_region(const JointPMF& joint, Checks checks = Checks::full);

/// Two-auxiliary description for X = Y, on a joint over {A,B,X,U,V}:
/// R0 >= max{H(X|A,U), H(X|B,V)}, R1 >= I(X;A|U), R2 >= I(X;B|V).
HalfspaceRegion star_region(const JointPMF& joint, Checks checks = Checks::full);

/// Two-auxiliary description for complementary delivery, on {A,B,X,Y}:
/// R0 >= max{H(X|A,Y), H(Y|B,X)}, R1 >= I(X;A|Y), R2 >= I(Y;B|X).
HalfspaceRegion starstar_region(const JointPMF& joint, Checks checks = Checks::full);

/// Every constraint satisfied with slack >= -1e-9.
bool contains(const HalfspaceRegion& region, const RateTriple& t) noexcept;

/// Most negative constraint slack at `t` (positive when strictly inside).
double min_slack(const HalfspaceRegion& region, const RateTriple& t) noexcept;

/// The axis-aligned corner (R0, R1, R2) of a region built only from the
/// three single-rate constraints; throws std::invalid_argument otherwise.
RateTriple corner(const HalfspaceRegion& region);

}  // namespace gwsi
