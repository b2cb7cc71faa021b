#include <algorithm>
#include <stdexcept>
#include <thread>

#include "../search/internal.hpp"
#include "internal.hpp"

namespace gwsi {

namespace {

constexpr EventFlags kXEvents = flag(Event::E1) | flag(Event::E2) | flag(Event::E3x) |
                                flag(Event::E4x) | flag(Event::E5x) | flag(Event::E6x);
constexpr EventFlags kYEvents = flag(Event::E1) | flag(Event::E2) | flag(Event::E3y) |
                                flag(Event::E4y) | flag(Event::E5y) | flag(Event::E6y);

// Everything a trial needs that does not change between trials.
struct Setup {
  Setup(const JointPMF& source, const AuxChannel& ch, const CodeParams& p)
      : params(p),
        joint(attach_channel(source, ch)),
        ctx(joint),
        xyuv(marginal(joint, VarSet{Var::X, Var::Y, Var::U, Var::V})),
        sampler(xyuv.probs()),
        code(gen_codebooks(joint, p)) {
    const auto strides = xyuv.strides();
    for (std::size_t a = 0; a < 4; ++a) {
      stride[a] = strides[a];
      card[a] = xyuv.vars()[a].size;
    }
  }

  CodeParams params;
  JointPMF joint;
  detail::CodecContext ctx;
  JointPMF xyuv;  // axes X, Y, U, V
  detail::Sampler sampler;
  Codebooks code;
  std::array<std::size_t, 4> stride{};
  std::array<std::size_t, 4> card{};
};

void check_source(const JointPMF& source, const AuxChannel& ch) {
  const auto& vs = source.vars();
  if (vs.size() != 4 || vs[0].name != Var::X || vs[1].name != Var::Y || vs[2].name != Var::U ||
      vs[3].name != Var::V) {
    throw std::invalid_argument("simulate: the source must be a pmf over (X, Y, U, V)");
  }
  if (auto bad = validate_pmf(source)) throw std::invalid_argument("simulate: " + *bad);
  for (const auto& a : source.vars()) {
    if (a.size > 256) throw std::invalid_argument("simulate: alphabets above 256 symbols");
  }
  if (ch.outputs.size() != 1 || ch.outputs.front().name != Var::W) {
    throw std::invalid_argument("simulate: the channel must produce W");
  }
}

TrialRecord run_trial(const Setup& s, std::uint64_t trial) {
  const std::size_t n = s.params.n;
  std::mt19937_64 g(detail::derive_seed(s.params.seed, trial + 1));
  TrialRecord r;
  r.trial = trial;
  r.x.resize(n);
  r.y.resize(n);
  r.u.resize(n);
  r.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cell = s.sampler(g);
    r.x[i] = static_cast<std::uint8_t>(cell / s.stride[0] % s.card[0]);
    r.y[i] = static_cast<std::uint8_t>(cell / s.stride[1] % s.card[1]);
    r.u[i] = static_cast<std::uint8_t>(cell / s.stride[2] % s.card[2]);
    r.v[i] = static_cast<std::uint8_t>(cell / s.stride[3] % s.card[3]);
  }

  const std::array<std::span<const std::uint8_t>, 4> block{r.x, r.y, r.u, r.v};
  if (!strongly_typical(block, s.xyuv, s.params.epsilon)) r.flags |= flag(Event::E1);

  r.sent = detail::encode(s.code, s.ctx, s.params, r.x, r.y);
  r.flags |= r.sent.flags;

  // The encoder's common codeword must look jointly typical with each
  // receiver's source and side information; otherwise that receiver's
  // decoding is charged to E4.
  const auto w = s.code.w.word(r.sent.m0p);
  detail::TypicalityScanner gx(s.ctx.xwu, Var::W, s.params.epsilon);
  gx.fix(n, {{Var::X, r.x}, {Var::U, r.u}});
  if (!gx.test(w)) r.flags |= flag(Event::E4x);
  detail::TypicalityScanner gy(s.ctx.ywv, Var::W, s.params.epsilon);
  gy.fix(n, {{Var::Y, r.y}, {Var::V, r.v}});
  if (!gy.test(w)) r.flags |= flag(Event::E4y);

  Decoded dx = detail::decode_side(s.code.w, s.code.x, s.ctx.wu, s.ctx.xwu, Var::X, Var::U,
                                   s.params.epsilon, true, r.sent.m0, r.sent.m1, r.u);
  Decoded dy = detail::decode_side(s.code.w, s.code.y, s.ctx.wv, s.ctx.ywv, Var::Y, Var::V,
                                   s.params.epsilon, false, r.sent.m0, r.sent.m2, r.v);
  r.flags |= dx.flags | dy.flags;
  r.x_hat = std::move(dx.estimate);
  r.y_hat = std::move(dy.estimate);
  r.x_error = r.x_hat != r.x;
  r.y_error = r.y_hat != r.y;
  return r;
}

void tally(SimOutcome& out, const TrialRecord& r) {
  ++out.trials;
  out.err_x += r.x_error;
  out.err_y += r.y_error;
  if ((r.x_error && !(r.flags & kXEvents)) || (r.y_error && !(r.flags & kYEvents))) {
    ++out.unflagged_errors;
  }
  for (std::size_t e = 0; e < kEventCount; ++e) {
    if (r.flags & (1u << e)) ++out.event_counts[e];
  }
}

}  // namespace

SimOutcome simulate(const JointPMF& source, const AuxChannel& ch, const CodeParams& params,
                    std::uint64_t trials, const TrialObserver& observer, std::size_t threads) {
  if (trials < 1) throw std::invalid_argument("simulate: trials must be >= 1");
  validate_params(params);
  check_source(source, ch);
  const Setup setup(source, ch, params);

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::uint64_t>(detail::resolve_threads(threads), trials));
  std::vector<SimOutcome> partial(workers);
  std::vector<TrialRecord> records(observer ? trials : 0);
  auto run_range = [&](std::size_t w) {
    const std::uint64_t lo = trials * w / workers, hi = trials * (w + 1) / workers;
    for (std::uint64_t t = lo; t < hi; ++t) {
      TrialRecord r = run_trial(setup, t);
      tally(partial[w], r);
      if (observer) records[t] = std::move(r);
    }
  };
  if (workers == 1) {
    run_range(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
  }

  SimOutcome out;
  for (const auto& p : partial) {
    out.trials += p.trials;
    out.err_x += p.err_x;
    out.err_y += p.err_y;
    out.unflagged_errors += p.unflagged_errors;
    for (std::size_t e = 0; e < kEventCount; ++e) out.event_counts[e] += p.event_counts[e];
  }
  const double t = static_cast<double>(out.trials);
  out.pe_x = static_cast<double>(out.err_x) / t;
  out.pe_y = static_cast<double>(out.err_y) / t;
  out.pe = std::max(out.pe_x, out.pe_y);
  for (const auto& r : records) observer(r);
  return out;
}

TrialRecord replay_trial(const JointPMF& source, const AuxChannel& ch, const CodeParams& params,
                         std::uint64_t trial) {
  validate_params(params);
  check_source(source, ch);
  const Setup setup(source, ch, params);
  return run_trial(setup, trial);
}

}  // namespace gwsi
