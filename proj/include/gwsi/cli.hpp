#pragma once

// Command-line front end: source documents, presets and the `gwsi` commands.

#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gwsi/measures.hpp"

namespace gwsi::cli {

/// Bad user input (malformed document, invalid pmf, unknown preset...). The
/// message names the offending field and, when known, the line.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SourceSpec {
  /// Cardinalities of X, Y, U, V.
  std::size_t sizes[4] = {1, 1, 1, 1};
  /// Row-major over (X, Y, U, V).
  std::vector<double> pmf;
  /// Empty for explicit documents.
  std::string preset;
  std::map<std::string, double> params;

  JointPMF joint() const;
};

/// Parses a source document:
///   alphabets: {X: 2, Y: 2, U: 1, V: 1}
///   pmf: [0.375, 0.125, 0.125, 0.375]
/// or
///   preset: {name: dsbs, params: {q: 0.25}}
SourceSpec parse_source(std::string_view text);

/// Presets: constant, dsbs(q), sgarro(a, b), compdel-dsbs(q), markov(q),
/// degraded(q, r). Missing parameters take their defaults.
SourceSpec make_preset(std::string_view name, const std::map<std::string, double>& params = {});
std::vector<std::string> preset_names();

/// Runs one command line (without the program name). Exit codes: 0 success,
/// 1 failed check, 2 usage error, 3 input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gwsi::cli
