#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gwsi/cli.hpp"

using namespace gwsi;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "gwsi_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("presets expand to explicit pmfs") {
  const auto s = cli::parse_source("preset: {name: dsbs, params: {q: 0.25}}");
  CHECK(s.sizes[0] == 2);
  CHECK(s.sizes[1] == 2);
  CHECK(s.sizes[2] == 1);
  CHECK(s.sizes[3] == 1);
  REQUIRE(s.pmf.size() == 4);
  const double q = 0.25;
  CHECK(s.pmf[0] == doctest::Approx((1 - q) / 2));
  CHECK(s.pmf[1] == doctest::Approx(q / 2));
  CHECK(s.pmf[2] == doctest::Approx(q / 2));
  CHECK(s.pmf[3] == doctest::Approx((1 - q) / 2));

  for (const auto& name : cli::preset_names()) {
    const auto p = cli::make_preset(name);
    double mass = 0.0;
    for (double v : p.pmf) mass += v;
    CHECK(mass == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(cli::make_preset("dsbs", {{"q", 1.5}}), cli::InputError);
  CHECK_THROWS_AS(cli::make_preset("dsbs", {{"z", 0.1}}), cli::InputError);
  CHECK_THROWS_AS(cli::make_preset("nope"), cli::InputError);
}

TEST_CASE("explicit documents") {
  std::string doc = "alphabets: {X: 2, Y: 2, U: 2, V: 2}\npmf: [";
  for (int i = 0; i < 16; ++i) doc += (i ? ", " : "") + std::string("0.0625");
  doc += "]\n";
  const auto s = cli::parse_source(doc);
  CHECK(s.pmf.size() == 16);
  CHECK(s.joint().size() == 16);
  CHECK(s.preset.empty());
}

TEST_CASE("document errors name the problem") {
  try {
    cli::parse_source("alphabets: {X: 2, Y: 2, U: 1, V: 1}\npmf: [0.5, 0.25, 0.25]\n");
    FAIL("expected an error");
  } catch (const cli::InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("3 entries") != std::string::npos);
    CHECK(msg.find("expected 4") != std::string::npos);
    CHECK(msg.find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(cli::parse_source("alphabets: {X: 2, Y: 1, U: 1, V: 1}\npmf: [0.7, 0.7]"),
                  cli::InputError);
  CHECK_THROWS_AS(cli::parse_source("alphabets: [1, 2"), cli::InputError);
  CHECK_THROWS_AS(cli::parse_source("alphabets: {X: 2, Y: 1, U: 1}\npmf: [0.5, 0.5]"),
                  cli::InputError);
  CHECK_THROWS_AS(cli::parse_source("alphabets: {X: 2, Y: 1, U: 1, V: 1, Q: 3}\npmf: [0.5, 0.5]"),
                  cli::InputError);
  CHECK_THROWS_AS(cli::parse_source("- just a list"), cli::InputError);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"info"}).code == 2);
  CHECK(run({"info", "--preset", "dsbs", "--bogus"}).code == 2);
  CHECK(run({"info", "--preset", "nope"}).code == 3);
  CHECK(run({"info", "--source", scratch("missing.yaml").string()}).code == 3);
  CHECK(run({"region", "--preset", "dsbs", "--family", "nope"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  // A closed form whose hypothesis fails is a failed check.
  CHECK(run({"sumrate", "--preset", "dsbs", "--grid", "2", "--case", "sgarro"}).code == 1);
  CHECK(run({"check", "--preset", "dsbs", "--grid", "2", "--theorem", "compdel"}).code == 1);
}

TEST_CASE("info prints the measures") {
  const auto r = run({"info", "--preset", "dsbs", "--q", "0.25"});
  CHECK(r.code == 0);
  CHECK(r.out.find("H(X|Y)=0.811278124459") != std::string::npos);
  CHECK(r.out.find("I(X;Y)=") != std::string::npos);
  CHECK(r.out.find("I(X;Y|U)=") != std::string::npos);
}

TEST_CASE("region writes one CSV row per weight vector") {
  const auto w = scratch("w.txt"), out = scratch("r.csv");
  write(w, "# one row\n1, 1, 1\n");
  const auto r = run({"region", "--preset", "dsbs", "--family", "inner", "--grid", "4",
                      "--weights-file", w.string(), "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto csv = slurp(out);
  CHECK(data_rows(csv) == 1);
  CHECK(csv.find("lambda0,lambda1,lambda2,value_bits,r0,r1,r2,channel_id\n") != std::string::npos);
  CHECK(csv.find("1,1,1,1.81127812446,") != std::string::npos);
  CHECK(fs::exists(out.string() + ".plot.py"));

  write(w, "1 1\n");
  CHECK(run({"region", "--preset", "dsbs", "--weights-file", w.string()}).code == 3);
}

TEST_CASE("simulation records are byte-identical across runs") {
  const std::vector<std::string> args{"simulate", "--preset", "compdel-dsbs", "--n", "8",
                                      "--trials", "1000", "--seed", "7"};
  const auto a = run(args), b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("events.E6y=") != std::string::npos);
  CHECK(a.out.find("unflagged_errors=0") != std::string::npos);
  CHECK(run({"simulate", "--preset", "dsbs", "--rates", "1,2"}).code == 2);
  CHECK(run({"simulate", "--preset", "dsbs", "--rates", "2,0,0", "--codebook-rates", "1,1,1"})
            .code == 2);
}

TEST_CASE("check on complementary delivery") {
  const auto r = run({"check", "--preset", "compdel-dsbs", "--q", "0.25", "--grid", "16"});
  CHECK(r.code == 0);
  for (const char* label : {"OUTER=0.8112", "INNER=0.8112", "STARSTAR=0.8112", "COMPDEL=0.8112"}) {
    CHECK(r.out.find(label) != std::string::npos);
  }
  CHECK(r.out.find("result=PASS") != std::string::npos);
}
