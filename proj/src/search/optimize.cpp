#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "internal.hpp"

namespace gwsi {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kImprovement = 1e-13;
constexpr std::size_t kBatchKernels = 512;
constexpr std::size_t kMaxRefineSweeps = 64;

void validate_weights(const Weights& w) {
  bool any = false;
  for (double v : w) {
    if (!(v >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    any = any || v > 0.0;
  }
  if (!any) throw std::invalid_argument("weights must not all be zero");
}

struct Candidate {
  double value = 0.0;
  std::size_t card_a = 0;
  std::size_t card_b = 0;
  std::vector<double> kernel;  // support rows only
  bool valid = false;
};

// Strict weak order: smaller value first, then the lexicographically smaller
// kernel (cardinalities compared first).
bool better(const Candidate& a, const Candidate& b) {
  if (!b.valid) return a.valid;
  if (!a.valid) return false;
  if (a.value != b.value) return a.value < b.value;
  if (a.card_a != b.card_a) return a.card_a < b.card_a;
  if (a.card_b != b.card_b) return a.card_b < b.card_b;
  return std::lexicographical_compare(a.kernel.begin(), a.kernel.end(), b.kernel.begin(),
                                      b.kernel.end());
}

struct Batch {
  std::size_t card_a = 0;
  std::size_t card_b = 0;
  std::size_t grid = 1;
  std::size_t stride = 0;  // numerators per kernel
  std::vector<std::uint32_t> counts;

  std::size_t size() const { return stride == 0 ? 0 : counts.size() / stride; }
  std::span<const std::uint32_t> kernel(std::size_t i) const {
    return std::span<const std::uint32_t>(counts).subspan(i * stride, stride);
  }
};

// Feeds every canonical grid kernel, in batches, to `work(batch, worker)`.
// With more than one thread the calling thread generates while the workers
// evaluate; the result must not depend on which worker saw which batch.
template <class Work>
void scan_kernels(const detail::FamilyLayout& layout, const std::vector<GridUse>& grids,
                  std::size_t threads, std::atomic<bool>& stop, Work&& work) {
  const std::size_t rows = layout.support.size();
  if (threads <= 1) {
    for (const auto& gu : grids) {
      Batch batch{gu.card_a, gu.card_b, gu.grid, rows * gu.card_a * gu.card_b, {}};
      detail::for_each_grid_kernel(rows, gu.card_a, gu.card_b, gu.grid,
                                   [&](std::span<const std::uint32_t> k) {
                                     batch.counts.insert(batch.counts.end(), k.begin(), k.end());
                                     if (batch.size() == kBatchKernels) {
                                       work(batch, 0);
                                       batch.counts.clear();
                                     }
                                     return !stop.load(std::memory_order_relaxed);
                                   });
      if (!batch.counts.empty() && !stop.load()) work(batch, 0);
      if (stop.load()) return;
    }
    return;
  }

  std::mutex mu;
  std::condition_variable cv_items, cv_space;
  std::deque<Batch> queue;
  bool finished = false;
  const std::size_t max_queue = threads * 4;

  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      while (true) {
        Batch b;
        {
          std::unique_lock lock(mu);
          cv_items.wait(lock, [&] { return finished || !queue.empty(); });
          if (queue.empty()) return;
          b = std::move(queue.front());
          queue.pop_front();
        }
        cv_space.notify_one();
        if (!stop.load(std::memory_order_relaxed)) work(b, t);
      }
    });
  }

  auto push = [&](Batch&& b) {
    std::unique_lock lock(mu);
    cv_space.wait(lock, [&] { return queue.size() < max_queue; });
    queue.push_back(std::move(b));
    lock.unlock();
    cv_items.notify_one();
  };

  for (const auto& gu : grids) {
    Batch batch{gu.card_a, gu.card_b, gu.grid, rows * gu.card_a * gu.card_b, {}};
    detail::for_each_grid_kernel(rows, gu.card_a, gu.card_b, gu.grid,
                                 [&](std::span<const std::uint32_t> k) {
                                   batch.counts.insert(batch.counts.end(), k.begin(), k.end());
                                   if (batch.size() == kBatchKernels) {
                                     Batch next{batch.card_a, batch.card_b, batch.grid,
                                                batch.stride, {}};
                                     push(std::move(batch));
                                     batch = std::move(next);
                                   }
                                   return !stop.load(std::memory_order_relaxed);
                                 });
    if (!batch.counts.empty()) push(std::move(batch));
    if (stop.load()) break;
  }
  {
    std::lock_guard lock(mu);
    finished = true;
  }
  cv_items.notify_all();
  pool.clear();
}

std::vector<GridUse> plan_grids(const detail::FamilyLayout& layout, const CardinalityCaps& caps,
                                const SearchConfig& cfg) {
  std::vector<GridUse> grids;
  for (const auto& [ka, kb] : detail::cardinality_pairs(caps, layout.two_outputs)) {
    grids.push_back(
        {ka, kb, detail::effective_grid(layout.support.size(), ka, kb, cfg.grid, cfg.budget)});
  }
  return grids;
}

Candidate make_candidate(double value, const Batch& b, std::size_t i) {
  Candidate c;
  c.value = value;
  c.card_a = b.card_a;
  c.card_b = b.card_b;
  const auto k = b.kernel(i);
  c.kernel.resize(k.size());
  const double g = static_cast<double>(b.grid);
  for (std::size_t j = 0; j < k.size(); ++j) c.kernel[j] = static_cast<double>(k[j]) / g;
  c.valid = true;
  return c;
}

// Coordinate descent on the support rows of the kernel: move `step` of mass
// between two output cells of one row, keep the move if it improves the
// objective. The step halves on every pass.
template <class Objective>
void refine(Candidate& best, std::size_t grid, std::size_t passes, std::uint64_t seed,
            std::size_t rows, Objective&& objective) {
  if (passes == 0 || !best.valid) return;
  const std::size_t cells = best.card_a * best.card_b;
  if (cells < 2) return;
  std::vector<std::array<std::size_t, 3>> moves;
  for (std::size_t s = 0; s < rows; ++s) {
    for (std::size_t i = 0; i < cells; ++i) {
      for (std::size_t j = 0; j < cells; ++j) {
        if (i != j) moves.push_back({s, i, j});
      }
    }
  }
  std::mt19937_64 rng(seed ^ 0x6a09e667f3bcc909ULL);
  double step = 1.0 / static_cast<double>(grid);
  auto& k = best.kernel;
  for (std::size_t pass = 0; pass < passes; ++pass) {
    step *= 0.5;
    std::shuffle(moves.begin(), moves.end(), rng);
    for (std::size_t sweep = 0; sweep < kMaxRefineSweeps; ++sweep) {
      bool improved = false;
      for (const auto& [s, i, j] : moves) {
        double& from = k[s * cells + i];
        double& to = k[s * cells + j];
        const double amount = std::min(step, from);
        if (amount <= 0.0) continue;
        const double old_from = from, old_to = to;
        from = old_from - amount;
        to = old_to + amount;
        const double v = objective(k);
        if (v < best.value - kImprovement) {
          best.value = v;
          improved = true;
        } else {
          from = old_from;
          to = old_to;
        }
      }
      if (!improved) break;
    }
  }
}

}  // namespace

SupportPoint support_value(const HalfspaceRegion& region, const Weights& weights) {
  validate_weights(weights);
  const double lo0 = std::max(0.0, region.bound(kR0).value_or(0.0));
  const double lb1 = std::max(0.0, region.bound(kR1).value_or(0.0));
  const double lb2 = std::max(0.0, region.bound(kR2).value_or(0.0));
  const auto s1 = region.bound(kR0R1);
  const auto s2 = region.bound(kR0R2);

  auto at = [&](double r0) {
    RateTriple t{r0, lb1, lb2};
    if (s1) t.r1 = std::max(lb1, *s1 - r0);
    if (s2) t.r2 = std::max(lb2, *s2 - r0);
    return t;
  };
  auto value = [&](const RateTriple& t) {
    return weights[0] * t.r0 + weights[1] * t.r1 + weights[2] * t.r2;
  };

  // The objective is convex and piecewise linear in R0 with breakpoints where
  // a sum constraint stops binding.
  std::vector<double> candidates{lo0};
  if (s1 && *s1 - lb1 > lo0) candidates.push_back(*s1 - lb1);
  if (s2 && *s2 - lb2 > lo0) candidates.push_back(*s2 - lb2);
  std::sort(candidates.begin(), candidates.end());

  SupportPoint best{value(at(candidates.front())), at(candidates.front())};
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const RateTriple t = at(candidates[i]);
    const double v = value(t);
    if (v < best.value - kTieTolerance) best = {v, t};
  }
  return best;
}

WeightedMin min_weighted(const JointPMF& source, BoundFamily family, const Weights& weights,
                         const SearchConfig& cfg) {
  validate_weights(weights);
  validate_config(cfg, source, family);
  const auto layout = detail::make_layout(source, family);
  const auto caps = resolve_caps(cfg, source, family);
  const auto grids = plan_grids(layout, caps, cfg);
  const std::size_t threads = detail::resolve_threads(cfg.threads);

  std::vector<Candidate> local(threads);
  std::vector<std::uint64_t> seen(threads, 0);
  std::atomic<bool> stop{false};
  scan_kernels(layout, grids, threads, stop, [&](const Batch& b, std::size_t t) {
    AuxChannel ch;
    for (std::size_t i = 0; i < b.size(); ++i) {
      detail::fill_channel(layout, b.card_a, b.card_b, b.kernel(i), b.grid, ch);
      const double v = support_value(detail::evaluate(layout, ch), weights).value;
      ++seen[t];
      if (!local[t].valid || v <= local[t].value) {
        Candidate c = make_candidate(v, b, i);
        if (better(c, local[t])) local[t] = std::move(c);
      }
    }
  });

  Candidate best;
  for (auto& c : local) {
    if (better(c, best)) best = std::move(c);
  }
  if (!best.valid) throw std::domain_error("min_weighted: no channel to search");

  refine(best, cfg.grid, cfg.refine_iters, cfg.seed, layout.support.size(),
         [&](const std::vector<double>& k) {
           const auto ch = detail::to_channel(layout, best.card_a, best.card_b, k);
           return support_value(detail::evaluate(layout, ch), weights).value;
         });

  AuxChannel channel = detail::to_channel(layout, best.card_a, best.card_b, best.kernel);
  const SupportPoint sp = support_value(detail::evaluate(layout, channel), weights);
  EnumerationStats stats;
  stats.grids = grids;
  for (auto n : seen) stats.channels += n;
  return WeightedMin{sp.value, std::move(channel), sp.point, std::move(stats)};
}

SweepResult sweep_boundary(const JointPMF& source, BoundFamily family,
                           const std::vector<Weights>& weight_list, const SearchConfig& cfg) {
  SweepResult result;
  result.rows.reserve(weight_list.size());
  for (const auto& w : weight_list) {
    auto m = min_weighted(source, family, w, cfg);
    result.rows.push_back({w, m.value, m.point, std::move(m.channel)});
  }
  return result;
}

bool member(const JointPMF& source, BoundFamily family, const RateTriple& t,
            const SearchConfig& cfg) {
  validate_config(cfg, source, family);
  const auto layout = detail::make_layout(source, family);
  const auto caps = resolve_caps(cfg, source, family);
  const auto grids = plan_grids(layout, caps, cfg);
  const std::size_t threads = detail::resolve_threads(cfg.threads);

  // Objective: worst constraint violation at t (<= 1e-9 means contained).
  std::vector<Candidate> local(threads);
  std::atomic<bool> stop{false};
  scan_kernels(layout, grids, threads, stop, [&](const Batch& b, std::size_t w) {
    AuxChannel ch;
    for (std::size_t i = 0; i < b.size(); ++i) {
      detail::fill_channel(layout, b.card_a, b.card_b, b.kernel(i), b.grid, ch);
      const double violation = -min_slack(detail::evaluate(layout, ch), t);
      if (violation <= 1e-9) stop.store(true);
      if (!local[w].valid || violation <= local[w].value) {
        Candidate c = make_candidate(violation, b, i);
        if (better(c, local[w])) local[w] = std::move(c);
      }
      if (stop.load(std::memory_order_relaxed)) return;
    }
  });
  if (stop.load()) return true;

  Candidate best;
  for (auto& c : local) {
    if (better(c, best)) best = std::move(c);
  }
  if (!best.valid) return false;
  refine(best, cfg.grid, cfg.refine_iters, cfg.seed, layout.support.size(),
         [&](const std::vector<double>& k) {
           const auto ch = detail::to_channel(layout, best.card_a, best.card_b, k);
           return -min_slack(detail::evaluate(layout, ch), t);
         });
  return best.value <= 1e-9;
}

}  // namespace gwsi
