#pragma once

// Finite-alphabet probability tensors and the base-2 information measures
// evaluated on them.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gwsi {

/// Random-variable labels. Sources live on (X, Y, U, V); W, A and B are
/// auxiliaries produced by a channel.
enum class Var : std::uint8_t { X, Y, U, V, W, A, B };

inline constexpr std::size_t kVarCount = 7;

std::string_view to_string(Var v) noexcept;
/// Throws std::invalid_argument on an unknown label.
Var var_from_string(std::string_view name);

/// A set of variable labels, stored as a bit mask.
class VarSet {
 public:
  constexpr VarSet() noexcept = default;
  constexpr VarSet(std::initializer_list<Var> vars) noexcept {
    for (Var v : vars) bits_ |= bit(v);
  }
  static constexpr VarSet from_bits(std::uint8_t bits) noexcept {
    VarSet s;
    s.bits_ = bits;
    return s;
  }

  constexpr bool contains(Var v) const noexcept { return (bits_ & bit(v)) != 0; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr bool intersects(VarSet o) const noexcept { return (bits_ & o.bits_) != 0; }
  constexpr bool subset_of(VarSet o) const noexcept { return (bits_ & ~o.bits_) == 0; }
  constexpr std::uint8_t bits() const noexcept { return bits_; }
  std::size_t size() const noexcept;

  constexpr VarSet operator|(VarSet o) const noexcept { return from_bits(bits_ | o.bits_); }
  constexpr VarSet operator-(VarSet o) const noexcept {
    return from_bits(static_cast<std::uint8_t>(bits_ & ~o.bits_));
  }
  constexpr bool operator==(const VarSet&) const noexcept = default;

  std::string to_string() const;

 private:
  static constexpr std::uint8_t bit(Var v) noexcept {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(v));
  }
  std::uint8_t bits_ = 0;
};

struct Alphabet {
  Var name;
  std::size_t size;

  bool operator==(const Alphabet&) const = default;
};

/// Dense probability tensor, row-major over `vars()` (first variable slowest).
///
/// The constructor enforces the structural invariants (unique names, sizes
/// >= 1, tensor length equal to the product of sizes). Numerical validity of
/// the entries is reported separately by `validate_pmf`, so that callers can
/// inspect bad inputs instead of losing them to an exception.
class JointPMF {
 public:
  JointPMF(std::vector<Alphabet> vars, std::vector<double> probs);

  const std::vector<Alphabet>& vars() const noexcept { return vars_; }
  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  VarSet var_set() const noexcept { return set_; }

  bool has(Var v) const noexcept { return set_.contains(v); }
  /// Position of `v` in `vars()`; throws std::invalid_argument if absent.
  std::size_t axis(Var v) const;
  std::size_t card(Var v) const { return vars_[axis(v)].size; }

  double at(std::span<const std::size_t> index) const;
  std::size_t offset(std::span<const std::size_t> index) const;
  /// Row-major strides, one per axis.
  std::vector<std::size_t> strides() const;

  bool operator==(const JointPMF&) const = default;

 private:
  std::vector<Alphabet> vars_;
  std::vector<double> probs_;
  VarSet set_;
};

/// Returns std::nullopt when every entry is nonnegative and the mass is 1
/// within 1e-12; otherwise a description naming the failing invariant.
std::optional<std::string> validate_pmf(const JointPMF& pmf);

/// Sums out every variable not in `keep`; surviving axes keep their order.
JointPMF marginal(const JointPMF& pmf, VarSet keep);

/// Conditional distribution of `outputs` given `inputs`. The kernel is stored
/// row-major: one row per input tuple (row-major over `inputs`), each row a
/// pmf over the output tuple (row-major over `outputs`).
struct AuxChannel {
  std::vector<Alphabet> inputs;
  std::vector<Alphabet> outputs;
  std::vector<double> kernel;

  std::size_t rows() const noexcept;
  std::size_t row_size() const noexcept;
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(kernel).subspan(r * row_size(), row_size());
  }

  bool operator==(const AuxChannel&) const = default;
};

/// nullopt when the shape matches and every row is a pmf within 1e-12.
std::optional<std::string> validate_channel(const AuxChannel& ch);

/// Joint p(outputs, base) = kernel(outputs | inputs) * base, with the channel
/// outputs placed in front of the base variables.
JointPMF attach_channel(const JointPMF& base, const AuxChannel& ch);

/// Entropy in bits of the marginal on `vars`.
double entropy(const JointPMF& pmf, VarSet vars);
/// out[i] = entropy(pmf, sets[i]), bit-identical to the one-at-a-time calls
/// but cheaper when many small marginals are needed.
void entropies(const JointPMF& pmf, std::span<const VarSet> sets, std::span<double> out);
/// H(A|B) = H(A,B) - H(B); A and B must be disjoint.
double cond_entropy(const JointPMF& pmf, VarSet a, VarSet b);
/// I(A;B) = H(A) + H(B) - H(A,B); A and B must be disjoint.
double mutual_info(const JointPMF& pmf, VarSet a, VarSet b);
/// I(A;B|C) = H(A|C) - H(A|B,C); A, B, C pairwise disjoint.
double cond_mutual_info(const JointPMF& pmf, VarSet a, VarSet b, VarSet c);

}  // namespace gwsi
