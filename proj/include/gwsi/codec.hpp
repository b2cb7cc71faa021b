#pragma once

// Random-binning code for the Gray-Wyner network with side information:
// i.i.d. codebooks for W, X and Y, uniform bin labels, a typicality encoder,
// two-stage joint-typicality decoders, and a Monte Carlo driver that counts
// every error event.
//
// Indices (codeword indices and bin labels) are 0-based here; index 0 plays
// the role of "index 1" in the usual 1-based description of the scheme.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "gwsi/measures.hpp"

namespace gwsi {

struct CodeParams {
  std::size_t n = 8;
  /// Codebook rates R0', R1', R2'.
  double rate0p = 0.0, rate1p = 0.0, rate2p = 0.0;
  /// Bin rates R0, R1, R2 (each at most the matching codebook rate).
  double rate0 = 0.0, rate1 = 0.0, rate2 = 0.0;
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  /// Refuse to build codebooks holding more symbols than this in total.
  std::uint64_t max_codebook_symbols = std::uint64_t{1} << 28;
};

/// Throws std::invalid_argument on an inconsistent parameter set.
void validate_params(const CodeParams& p);

struct CodeSizes {
  std::uint64_t w, x, y;        // codewords, 2^ceil(n R')
  std::uint64_t bw, bx, by;     // bins, 2^floor(n R)
};
CodeSizes code_sizes(const CodeParams& p);

/// A list of equal-length codewords over one alphabet, with bin labels.
class Codebook {
 public:
  Codebook() = default;
  Codebook(std::size_t n, std::size_t alphabet, std::vector<std::uint8_t> symbols,
           std::vector<std::uint32_t> bins, std::uint64_t bin_count);

  std::size_t n() const noexcept { return n_; }
  std::size_t alphabet() const noexcept { return alphabet_; }
  std::size_t size() const noexcept { return n_ == 0 ? 0 : symbols_.size() / n_; }
  std::uint64_t bin_count() const noexcept { return bin_count_; }

  std::span<const std::uint8_t> word(std::size_t i) const {
    return std::span<const std::uint8_t>(symbols_).subspan(i * n_, n_);
  }
  std::uint32_t bin(std::size_t i) const { return bins_[i]; }
  std::span<const std::uint32_t> bins() const noexcept { return bins_; }
  /// Codeword indices carrying label `b`, in increasing order.
  std::span<const std::uint32_t> bin_members(std::uint64_t b) const;

  bool operator==(const Codebook& o) const {
    return n_ == o.n_ && alphabet_ == o.alphabet_ && symbols_ == o.symbols_ && bins_ == o.bins_ &&
           bin_count_ == o.bin_count_;
  }

 private:
  std::size_t n_ = 0;
  std::size_t alphabet_ = 0;
  std::vector<std::uint8_t> symbols_;
  std::vector<std::uint32_t> bins_;
  std::uint64_t bin_count_ = 1;
  std::vector<std::uint32_t> by_bin_;  // indices sorted by (bin, index)
};

struct Codebooks {
  Codebook w, x, y;
  bool operator==(const Codebooks&) const = default;
};

/// Relative strong typicality of aligned sequences (one per variable of
/// `pmf`, in the same order).
bool strongly_typical(std::span<const std::span<const std::uint8_t>> seqs, const JointPMF& pmf,
                      double epsilon);

/// Draws codebooks from the W, X and Y marginals of `joint` (which must hold
/// W, X, Y, U and V); fully determined by `params.seed`.
Codebooks gen_codebooks(const JointPMF& joint, const CodeParams& params);

enum class Event : std::uint8_t { E1, E2, E3x, E3y, E4x, E4y, E5x, E5y, E6x, E6y };
inline constexpr std::size_t kEventCount = 10;
std::string_view to_string(Event e) noexcept;

using EventFlags = std::uint16_t;
constexpr EventFlags flag(Event e) noexcept {
  return static_cast<EventFlags>(1u << static_cast<unsigned>(e));
}

struct Encoded {
  std::uint32_t m0p = 0, m1p = 0, m2p = 0;  // chosen codeword indices
  std::uint32_t m0 = 0, m1 = 0, m2 = 0;     // transmitted bin labels
  EventFlags flags = 0;
};

Encoded encode(const Codebooks& cb, const JointPMF& joint, const CodeParams& params,
               std::span<const std::uint8_t> x, std::span<const std::uint8_t> y);

struct Decoded {
  std::vector<std::uint8_t> estimate;
  std::uint32_t w_index = 0;  // codeword index chosen in the first stage
  EventFlags flags = 0;
};

Decoded decode_x(const Codebooks& cb, const JointPMF& joint, const CodeParams& params,
                 std::uint32_t m0, std::uint32_t m1, std::span<const std::uint8_t> u);
Decoded decode_y(const Codebooks& cb, const JointPMF& joint, const CodeParams& params,
                 std::uint32_t m0, std::uint32_t m2, std::span<const std::uint8_t> v);

/// Everything observable about one simulated block.
struct TrialRecord {
  std::uint64_t trial = 0;
  Encoded sent;
  EventFlags flags = 0;  // union of encoder, decoder and source events
  bool x_error = false;
  bool y_error = false;
  std::vector<std::uint8_t> x, y, u, v, x_hat, y_hat;
};

struct SimOutcome {
  std::uint64_t trials = 0;
  std::uint64_t err_x = 0, err_y = 0;
  /// Trials where a reconstruction failed without any flagged event.
  std::uint64_t unflagged_errors = 0;
  std::array<std::uint64_t, kEventCount> event_counts{};
  double pe_x = 0.0, pe_y = 0.0;
  double pe = 0.0;  // max(pe_x, pe_y)

  bool operator==(const SimOutcome&) const = default;
};

using TrialObserver = std::function<void(const TrialRecord&)>;

/// Runs `trials` blocks with one fixed random code. Trial t draws its source
/// block from a substream derived from (params.seed, t), so results do not
/// depend on the thread count. The observer, if any, sees trials in order.
SimOutcome simulate(const JointPMF& source, const AuxChannel& ch, const CodeParams& params,
                    std::uint64_t trials, const TrialObserver& observer = {},
                    std::size_t threads = 0);

/// Replays a single trial of `simulate` with the same code.
TrialRecord replay_trial(const JointPMF& source, const AuxChannel& ch, const CodeParams& params,
                         std::uint64_t trial);

}  // namespace gwsi
