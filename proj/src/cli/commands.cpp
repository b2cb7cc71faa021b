#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "gwsi/cli.hpp"
#include "gwsi/codec.hpp"
#include "gwsi/regions.hpp"
#include "gwsi/search.hpp"

#ifndef GWSI_VERSION
#define GWSI_VERSION "0.0.0"
#endif

namespace gwsi::cli {

namespace {

constexpr int kExitCheck = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;

/// Thrown for option values CLI11 cannot judge on its own.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string join(std::span<const double> v, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += num(v[i]);
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> parse_triple(const std::string& text, const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (v.size() != 3) throw UsageError(std::string(what) + " needs three comma-separated values");
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw UsageError(std::string(what) + " must be finite and nonnegative");
    }
  }
  return v;
}

// One weight vector per line, separated by commas and/or blanks; '#' starts
// a comment.
std::vector<Weights> parse_weights(const std::string& text, const std::string& path) {
  std::vector<Weights> rows;
  std::istringstream in(text);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line) {
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> v;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw InputError(path + ":" + std::to_string(lineno) + ": '" + tok + "' is not a number");
      }
    }
    if (v.empty()) continue;
    if (v.size() != 3) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected 3 weights, found " +
                       std::to_string(v.size()));
    }
    for (double x : v) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw InputError(path + ":" + std::to_string(lineno) + ": weights must be >= 0");
      }
    }
    rows.push_back({v[0], v[1], v[2]});
  }
  if (rows.empty()) throw InputError(path + ": no weight rows");
  return rows;
}

// Options shared by every command that needs a source.
struct SourceOptions {
  std::string file;
  std::string preset;
  std::optional<double> q;
  std::vector<std::string> params;

  void add(CLI::App* app) {
    auto* f = app->add_option("--source", file, "Source document (YAML)");
    auto* p = app->add_option("--preset", preset, "Named source preset");
    f->excludes(p);
    app->add_option("--q", q, "Shorthand for --param q=<value>");
    app->add_option("--param", params, "Preset parameter key=value (repeatable)");
  }

  SourceSpec resolve() const {
    if (!file.empty()) {
      if (q || !params.empty()) throw UsageError("--q/--param only apply to --preset");
      return parse_source(read_file(file));
    }
    if (preset.empty()) throw UsageError("one of --source or --preset is required");
    std::map<std::string, double> values;
    for (const auto& kv : params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value");
      try {
        values[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
      } catch (const std::exception&) {
        throw UsageError("--param " + kv + ": value is not a number");
      }
    }
    if (q) values["q"] = *q;
    return make_preset(preset, values);
  }
};

// Options shared by the search-driven commands.
struct SearchOptions {
  SearchConfig cfg;

  void add(CLI::App* app) {
    app->add_option("--grid", cfg.grid, "Kernel grid resolution")->check(CLI::PositiveNumber);
    app->add_option("--wcard", cfg.w_card, "Cap on |W| (0: default bound)");
    app->add_option("--refine", cfg.refine_iters, "Coordinate-refinement passes");
    app->add_option("--seed", cfg.seed, "Seed for refinement");
    app->add_option("--budget", cfg.budget, "Work cap per cardinality (0: unlimited)");
    app->add_flag("--override-caps", cfg.override_caps, "Allow caps above the stated bounds");
  }
};

void describe_source(std::ostream& os, const SourceSpec& s, const char* prefix) {
  os << prefix << "source.sizes=" << s.sizes[0] << ',' << s.sizes[1] << ',' << s.sizes[2] << ','
     << s.sizes[3] << '\n';
  if (!s.preset.empty()) {
    os << prefix << "source.preset=" << s.preset << '\n';
    for (const auto& [k, v] : s.params) os << prefix << "source.param." << k << '=' << num(v) << '\n';
  }
  os << prefix << "source.pmf=" << join(s.pmf) << '\n';
}

void describe_search(std::ostream& os, const SearchConfig& c, const char* prefix) {
  os << prefix << "grid=" << c.grid << '\n'
     << prefix << "wcard=" << c.w_card << '\n'
     << prefix << "refine=" << c.refine_iters << '\n'
     << prefix << "seed=" << c.seed << '\n'
     << prefix << "budget=" << c.budget << '\n'
     << prefix << "override_caps=" << (c.override_caps ? 1 : 0) << '\n';
}

// Writes to --out when given, else to the command's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw InputError("cannot write " + path);
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

// ---------------------------------------------------------------- info

int cmd_info(const SourceSpec& spec, std::ostream& out) {
  const JointPMF p = spec.joint();
  out << "version=" << GWSI_VERSION << '\n';
  describe_source(out, spec, "");
  const Var vars[4] = {Var::X, Var::Y, Var::U, Var::V};
  auto name = [](VarSet s) {
    std::string n;
    for (char c : s.to_string()) {
      if (c != '{' && c != '}' && c != ',') n += c;
    }
    return n;
  };
  for (Var a : vars) out << "H(" << to_string(a) << ")=" << num(entropy(p, {a})) << '\n';
  out << "H(XYUV)=" << num(entropy(p, p.var_set())) << '\n';
  for (Var a : vars) {
    for (Var b : vars) {
      if (a == b) continue;
      const VarSet sa{a}, sb{b};
      out << "H(" << name(sa) << '|' << name(sb) << ")=" << num(cond_entropy(p, sa, sb)) << '\n';
      if (static_cast<int>(a) < static_cast<int>(b)) {
        out << "H(" << name(sa | sb) << ")=" << num(entropy(p, sa | sb)) << '\n';
        out << "I(" << name(sa) << ';' << name(sb) << ")=" << num(mutual_info(p, sa, sb)) << '\n';
      }
    }
  }
  for (Var a : vars) {
    for (Var b : vars) {
      if (static_cast<int>(b) <= static_cast<int>(a)) continue;
      for (Var c : vars) {
        if (c == a || c == b) continue;
        out << "I(" << to_string(a) << ';' << to_string(b) << '|' << to_string(c)
            << ")=" << num(cond_mutual_info(p, {a}, {b}, {c})) << '\n';
      }
    }
  }
  const VarSet xy{Var::X, Var::Y};
  out << "H(XY|U)=" << num(cond_entropy(p, xy, {Var::U})) << '\n'
      << "H(XY|V)=" << num(cond_entropy(p, xy, {Var::V})) << '\n'
      << "I(XY;V|U)=" << num(cond_mutual_info(p, xy, {Var::V}, {Var::U})) << '\n'
      << "I(XY;U|V)=" << num(cond_mutual_info(p, xy, {Var::U}, {Var::V})) << '\n';
  out << "struct.x_equals_y=" << same_variable(p, Var::X, Var::Y) << '\n'
      << "struct.u_equals_y=" << same_variable(p, Var::U, Var::Y) << '\n'
      << "struct.v_equals_x=" << same_variable(p, Var::V, Var::X) << '\n'
      << "struct.x_function_of_y=" << is_function_of(p, Var::X, Var::Y) << '\n'
      << "struct.markov_xy_u_v=" << markov_xy_u_v(p) << '\n';
  return 0;
}

// ---------------------------------------------------------------- region

std::vector<Weights> default_weights() {
  return {{1, 1, 1}, {2, 1, 1}, {1, 2, 1}, {1, 1, 2}, {1, 2, 2}, {2, 2, 1}, {2, 1, 2},
          {3, 1, 1}, {1, 3, 1}, {1, 1, 3}};
}

void write_plot_stub(const std::string& csv_path) {
  std::ofstream py(csv_path + ".plot.py", std::ios::binary);
  if (!py) throw InputError("cannot write " + csv_path + ".plot.py");
  std::string base = csv_path;
  if (const auto slash = base.find_last_of('/'); slash != std::string::npos) {
    base = base.substr(slash + 1);
  }
  py << "# Plots the supporting points in " << base << ".\n"
     << "import csv, os, sys\n"
     << "import matplotlib.pyplot as plt\n\n"
     << "path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "
     << "\"" << base << "\")\n"
     << "with open(path) as f:\n"
     << "    rows = list(csv.DictReader(l for l in f if not l.startswith(\"#\")))\n"
     << "fig = plt.figure()\n"
     << "ax = fig.add_subplot(projection=\"3d\")\n"
     << "ax.scatter([float(r[\"r1\"]) for r in rows], [float(r[\"r2\"]) for r in rows],\n"
     << "           [float(r[\"r0\"]) for r in rows])\n"
     << "ax.set_xlabel(\"R1\"); ax.set_ylabel(\"R2\"); ax.set_zlabel(\"R0\")\n"
     << "plt.savefig(os.path.splitext(path)[0] + \".png\")\n";
}

int cmd_region(const SourceSpec& spec, BoundFamily family, const SearchConfig& cfg,
               const std::string& weights_file, const std::string& out_path, std::ostream& out) {
  const auto weights =
      weights_file.empty() ? default_weights() : parse_weights(read_file(weights_file), weights_file);
  const JointPMF source = spec.joint();
  const auto result = sweep_boundary(source, family, weights, cfg);
  Sink sink(out_path, out);
  auto& os = *sink;
  os << "# gwsi " << GWSI_VERSION << " region\n# family=" << to_string(family) << '\n';
  describe_source(os, spec, "# ");
  describe_search(os, cfg, "# ");
  os << "lambda0,lambda1,lambda2,value_bits,r0,r1,r2,channel_id\n";
  for (const auto& r : result.rows) {
    os << num(r.weights[0]) << ',' << num(r.weights[1]) << ',' << num(r.weights[2]) << ','
       << num(r.value) << ',' << num(r.point.r0) << ',' << num(r.point.r1) << ','
       << num(r.point.r2) << ',' << channel_id(r.channel) << '\n';
  }
  if (!out_path.empty()) write_plot_stub(out_path);
  return 0;
}

// ---------------------------------------------------------------- sumrate

int cmd_sumrate(const SourceSpec& spec, BoundFamily family, const SearchConfig& cfg,
                const std::string& case_name, double tolerance, std::ostream& out) {
  const JointPMF source = spec.joint();
  const auto m = min_weighted(source, family, {1.0, 1.0, 1.0}, cfg);
  out << "family=" << to_string(family) << '\n'
      << "sum_rate=" << num(m.value) << '\n'
      << "point=" << num(m.point.r0) << ',' << num(m.point.r1) << ',' << num(m.point.r2) << '\n'
      << "channel=" << channel_id(m.channel) << '\n'
      << "channels_evaluated=" << m.stats.channels << '\n';
  if (case_name.empty()) return 0;
  const SumRateCase c = sum_rate_case_from_string(case_name);
  const double closed = closed_form_sum_rate(c, source);
  const double gap = std::abs(m.value - closed);
  const bool ok = gap <= tolerance;
  out << "case=" << to_string(c) << '\n'
      << "closed_form=" << num(closed) << '\n'
      << "gap=" << num(gap) << '\n'
      << "tolerance=" << num(tolerance) << '\n'
      << "result=" << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : kExitCheck;
}

// ---------------------------------------------------------------- simulate

AuxChannel aux_channel(const std::string& kind, std::size_t nx, std::size_t ny) {
  AuxChannel ch;
  ch.inputs = {{Var::X, nx}, {Var::Y, ny}};
  std::size_t card = 1;
  if (kind == "x") card = nx;
  else if (kind == "y") card = ny;
  else if (kind == "xy") card = nx * ny;
  else if (kind != "const") throw UsageError("--aux must be one of const, x, y, xy");
  ch.outputs = {{Var::W, card}};
  ch.kernel.assign(nx * ny * card, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      std::size_t w = 0;
      if (kind == "x") w = x;
      else if (kind == "y") w = y;
      else if (kind == "xy") w = x * ny + y;
      ch.kernel[(x * ny + y) * card + w] = 1.0;
    }
  }
  return ch;
}

struct SimOptions {
  std::string aux = "xy";
  std::string rates, codebook_rates, out;
  std::size_t n = 8;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 0;
  double epsilon = 0.1;
};

int cmd_simulate(const SourceSpec& spec, const SimOptions& o, std::ostream& out) {
  const JointPMF source = spec.joint();
  const AuxChannel ch = aux_channel(o.aux, spec.sizes[0], spec.sizes[1]);
  const JointPMF joint = attach_channel(source, ch);
  const RateTriple inner = corner(inner_region(joint));

  CodeParams p;
  p.n = o.n;
  p.epsilon = o.epsilon;
  p.seed = o.seed;
  if (!o.rates.empty()) {
    const auto r = parse_triple(o.rates, "--rates");
    p.rate0 = r[0], p.rate1 = r[1], p.rate2 = r[2];
  } else {
    p.rate0 = 1.1 * inner.r0, p.rate1 = 1.1 * inner.r1, p.rate2 = 1.1 * inner.r2;
  }
  if (!o.codebook_rates.empty()) {
    const auto r = parse_triple(o.codebook_rates, "--codebook-rates");
    p.rate0p = r[0], p.rate1p = r[1], p.rate2p = r[2];
  } else {
    const VarSet x{Var::X}, y{Var::Y}, w{Var::W};
    p.rate0p = std::max(mutual_info(joint, x | y, w) + 0.2, p.rate0);
    p.rate1p = std::max(entropy(source, x) + 0.2, p.rate1);
    p.rate2p = std::max(entropy(source, y) + 0.2, p.rate2);
  }
  try {
    validate_params(p);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const CodeSizes sizes = code_sizes(p);
  const SimOutcome r = simulate(source, ch, p, o.trials);

  Sink sink(o.out, out);
  auto& os = *sink;
  os << "version=" << GWSI_VERSION << '\n' << "command=simulate\n";
  describe_source(os, spec, "");
  os << "aux=" << o.aux << '\n'
     << "n=" << p.n << '\n'
     << "trials=" << o.trials << '\n'
     << "epsilon=" << num(p.epsilon) << '\n'
     << "seed=" << p.seed << '\n'
     << "rates=" << num(p.rate0) << ',' << num(p.rate1) << ',' << num(p.rate2) << '\n'
     << "codebook_rates=" << num(p.rate0p) << ',' << num(p.rate1p) << ',' << num(p.rate2p) << '\n'
     << "inner_corner=" << num(inner.r0) << ',' << num(inner.r1) << ',' << num(inner.r2) << '\n'
     << "codewords=" << sizes.w << ',' << sizes.x << ',' << sizes.y << '\n'
     << "bins=" << sizes.bw << ',' << sizes.bx << ',' << sizes.by << '\n'
     << "err_x=" << r.err_x << '\n'
     << "err_y=" << r.err_y << '\n'
     << "pe_x=" << num(r.pe_x) << '\n'
     << "pe_y=" << num(r.pe_y) << '\n'
     << "pe=" << num(r.pe) << '\n'
     << "unflagged_errors=" << r.unflagged_errors << '\n';
  for (std::size_t e = 0; e < kEventCount; ++e) {
    os << "events." << to_string(static_cast<Event>(e)) << '=' << r.event_counts[e] << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- check

struct InvariantResult {
  std::uint64_t channels = 0;
  std::uint64_t markov_failures = 0;
  std::uint64_t nesting_failures = 0;
  double worst_markov = 0.0;
  double worst_slack = 0.0;
};

// Over every enumerated channel: the attached joint must factor as
// p(w|x,y)p(x,y,u,v), and the inner corner must satisfy the outer bound.
InvariantResult run_invariants(const JointPMF& source, const SearchConfig& cfg) {
  InvariantResult r;
  const VarSet xy{Var::X, Var::Y}, uv{Var::U, Var::V}, w{Var::W};
  enumerate_channels(source, BoundFamily::inner, cfg, [&](const AuxChannel& ch) {
    const JointPMF joint = attach_channel(source, ch);
    const double leak = cond_mutual_info(joint, w, uv, xy);
    r.worst_markov = std::max(r.worst_markov, leak);
    if (leak > 1e-9) ++r.markov_failures;
    const double slack =
        min_slack(outer_region(joint, Checks::trusted), corner(inner_region(joint, Checks::trusted)));
    r.worst_slack = std::min(r.worst_slack, slack);
    if (slack < -1e-9) ++r.nesting_failures;
    ++r.channels;
    return true;
  });
  return r;
}

std::vector<Theorem> applicable_theorems(const JointPMF& s) {
  std::vector<Theorem> t;
  if (same_variable(s, Var::X, Var::Y)) t.push_back(Theorem::xy_equal);
  if (is_function_of(s, Var::X, Var::Y) && markov_xy_u_v(s)) t.push_back(Theorem::degraded);
  if (same_variable(s, Var::U, Var::Y) && same_variable(s, Var::V, Var::X)) {
    t.push_back(Theorem::compdel);
  }
  return t;
}

int cmd_check(const SourceSpec& spec, SearchConfig cfg, const std::string& theorem_name,
              const std::string& weights_file, const std::string& out_path, std::ostream& out) {
  const JointPMF source = spec.joint();
  const std::vector<Weights> extra =
      weights_file.empty() ? std::vector<Weights>{} : parse_weights(read_file(weights_file), weights_file);
  std::vector<Theorem> theorems;
  if (!theorem_name.empty()) {
    theorems.push_back(theorem_from_string(theorem_name));
  } else {
    theorems = applicable_theorems(source);
  }

  Sink sink(out_path, out);
  auto& os = *sink;
  os << "# gwsi " << GWSI_VERSION << " check\n";
  describe_source(os, spec, "# ");
  describe_search(os, cfg, "# ");
  os << "# tolerance=" << num(cfg.tolerance) << '\n';

  bool pass = true;
  if (theorems.empty()) os << "special cases: none apply\n";
  for (Theorem t : theorems) {
    const auto report = check_special_case(t, source, cfg, extra);
    os << "special case " << to_string(t) << " [" << report.hypothesis << "]\n";
    for (const auto& row : report.rows) {
      os << "  weights=" << num(row.weights[0]) << ',' << num(row.weights[1]) << ','
         << num(row.weights[2]);
      for (const auto& [label, v] : row.values) os << ' ' << label << '=' << num(v);
      os << " max_gap=" << num(row.max_gap) << ' ' << (row.pass ? "PASS" : "FAIL") << '\n';
    }
    os << "  " << (report.pass ? "PASS" : "FAIL") << '\n';
    pass = pass && report.pass;
  }

  const auto inv = run_invariants(source, cfg);
  const bool markov_ok = inv.markov_failures == 0;
  const bool nesting_ok = inv.nesting_failures == 0;
  os << "invariant markov channels=" << inv.channels << " failures=" << inv.markov_failures
     << " worst=" << num(inv.worst_markov) << ' ' << (markov_ok ? "PASS" : "FAIL") << '\n';
  os << "invariant nesting channels=" << inv.channels << " failures=" << inv.nesting_failures
     << " worst_slack=" << num(inv.worst_slack) << ' ' << (nesting_ok ? "PASS" : "FAIL") << '\n';
  pass = pass && markov_ok && nesting_ok;
  os << "result=" << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? 0 : kExitCheck;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rate regions and random-binning simulation for the Gray-Wyner network with "
               "receiver side information",
               "gwsi"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GWSI_VERSION);

  SourceOptions src;
  SearchOptions search;
  std::string family = "inner", weights_file, out_path, case_name, theorem;
  double tolerance = -1.0;
  SimOptions sim;

  auto* info = app.add_subcommand("info", "Print information measures of a source");
  src.add(info);

  auto* region = app.add_subcommand("region", "Sweep the lower boundary and write CSV");
  src.add(region);
  search.add(region);
  region->add_option("--family", family, "gw, inner, outer, star or starstar");
  region->add_option("--weights-file", weights_file, "One weight triple per line");
  region->add_option("--out", out_path, "CSV path (default: stdout)");

  auto* sumrate = app.add_subcommand("sumrate", "Minimum sum rate, optionally vs a closed form");
  src.add(sumrate);
  search.add(sumrate);
  sumrate->add_option("--family", family, "gw, inner, outer, star or starstar");
  sumrate->add_option("--case", case_name, "markov, sgarro or compdel");
  sumrate->add_option("--tolerance", tolerance, "Allowed gap to the closed form");

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo run of the binning code");
  src.add(simulate_cmd);
  simulate_cmd->add_option("--aux", sim.aux, "Auxiliary W: const, x, y or xy");
  simulate_cmd->add_option("--n", sim.n, "Block length")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--trials", sim.trials, "Number of blocks");
  simulate_cmd->add_option("--seed", sim.seed, "Seed");
  simulate_cmd->add_option("--epsilon", sim.epsilon, "Typicality slack");
  simulate_cmd->add_option("--rates", sim.rates, "Bin rates r0,r1,r2");
  simulate_cmd->add_option("--codebook-rates", sim.codebook_rates, "Codebook rates r0p,r1p,r2p");
  simulate_cmd->add_option("--out", sim.out, "Record path (default: stdout)");

  auto* check = app.add_subcommand("check", "Verify special cases and invariants");
  src.add(check);
  search.add(check);
  check->add_option("--theorem", theorem, "xy-equal, degraded, compdel, star or starstar");
  check->add_option("--weights-file", weights_file, "Extra weight triples to compare");
  check->add_option("--tolerance", tolerance, "Agreement tolerance");
  check->add_option("--out", out_path, "Report path (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << GWSI_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "gwsi: " << e.what() << '\n';
    if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << "see 'gwsi " << sub->get_name() << " --help'\n";
    } else {
      err << "see 'gwsi --help'\n";
    }
    return kExitUsage;
  }

  try {
    const SourceSpec spec = src.resolve();
    SearchConfig cfg = search.cfg;
    if (info->parsed()) return cmd_info(spec, out);
    if (region->parsed()) {
      return cmd_region(spec, family_from_string(family), cfg, weights_file, out_path, out);
    }
    if (sumrate->parsed()) {
      return cmd_sumrate(spec, family_from_string(family), cfg, case_name,
                         tolerance < 0.0 ? 1e-6 : tolerance, out);
    }
    if (simulate_cmd->parsed()) return cmd_simulate(spec, sim, out);
    if (check->parsed()) {
      if (tolerance >= 0.0) cfg.tolerance = tolerance;
      return cmd_check(spec, cfg, theorem, weights_file, out_path, out);
    }
  } catch (const InputError& e) {
    err << "gwsi: input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const UsageError& e) {
    err << "gwsi: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "gwsi: " << e.what() << '\n';
    return kExitCheck;
  } catch (const std::length_error& e) {
    err << "gwsi: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "gwsi: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace gwsi::cli
