#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "gwsi/search.hpp"

namespace gwsi::detail {

/// How a family's channel attaches to the source.
struct FamilyLayout {
  BoundFamily family;
  JointPMF base;
  std::vector<Alphabet> inputs;
  std::size_t rows = 0;
  /// Input rows with positive probability; the only rows that are searched.
  std::vector<std::size_t> support;
  bool two_outputs = false;
};

FamilyLayout make_layout(const JointPMF& source, BoundFamily family);

/// Numerators of a grid kernel restricted to the support rows, row-major:
/// counts[s * cells + j] with cells = card_a * card_b.
using CountsVisitor = std::function<bool(std::span<const std::uint32_t>)>;

/// Visits canonical grid kernels; returns false if the visitor stopped early.
bool for_each_grid_kernel(std::size_t support_rows, std::size_t card_a, std::size_t card_b,
                          std::size_t grid, const CountsVisitor& visit);

/// Work estimate used against the budget (canonical kernels for one output,
/// raw row tuples for two outputs, which are filtered after generation).
double estimated_work(std::size_t support_rows, std::size_t card_a, std::size_t card_b,
                      std::size_t grid);

/// Largest grid / 2^j whose estimated work fits the budget, else 1.
std::size_t effective_grid(std::size_t support_rows, std::size_t card_a, std::size_t card_b,
                           std::size_t grid, std::uint64_t budget);

std::vector<std::pair<std::size_t, std::size_t>> cardinality_pairs(const CardinalityCaps& caps,
                                                                   bool two_outputs);

/// Full kernel (all input rows) from support-row numerators, reusing `ch`'s
/// storage.
void fill_channel(const FamilyLayout& layout, std::size_t card_a, std::size_t card_b,
                  std::span<const std::uint32_t> counts, std::size_t grid, AuxChannel& ch);

/// Full kernel (all input rows) from support-row numerators.
AuxChannel to_channel(const FamilyLayout& layout, std::size_t card_a, std::size_t card_b,
                      std::span<const std::uint32_t> counts, std::size_t grid);

/// Same, from real-valued support rows.
AuxChannel to_channel(const FamilyLayout& layout, std::size_t card_a, std::size_t card_b,
                      std::span<const double> support_kernel);

/// Support rows of a full kernel, flattened.
std::vector<double> support_kernel(const FamilyLayout& layout, const AuxChannel& ch);

HalfspaceRegion evaluate(const FamilyLayout& layout, const AuxChannel& ch);

std::size_t resolve_threads(std::size_t requested);

}  // namespace gwsi::detail
