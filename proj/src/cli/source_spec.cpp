#include <cmath>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "gwsi/cli.hpp"

namespace gwsi::cli {

namespace {

constexpr const char* kVarKeys[4] = {"X", "Y", "U", "V"};

std::string where(const YAML::Node& node) {
  const auto m = node.Mark();
  if (m.is_null()) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

double param(const std::map<std::string, double>& params, const std::string& key, double def) {
  const auto it = params.find(key);
  return it == params.end() ? def : it->second;
}

void check_probability(const std::string& preset, const std::string& key, double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw InputError("preset " + preset + ": parameter " + key + " must lie in [0,1]");
  }
}

// Fills a pmf over (X, Y, U, V) from a generator of weighted tuples.
struct Builder {
  SourceSpec spec;
  Builder(std::string name, std::map<std::string, double> params, std::size_t nx, std::size_t ny,
          std::size_t nu, std::size_t nv) {
    spec.preset = std::move(name);
    spec.params = std::move(params);
    spec.sizes[0] = nx;
    spec.sizes[1] = ny;
    spec.sizes[2] = nu;
    spec.sizes[3] = nv;
    spec.pmf.assign(nx * ny * nu * nv, 0.0);
  }
  void add(std::size_t x, std::size_t y, std::size_t u, std::size_t v, double p) {
    spec.pmf[((x * spec.sizes[1] + y) * spec.sizes[2] + u) * spec.sizes[3] + v] += p;
  }
};

}  // namespace

JointPMF SourceSpec::joint() const {
  return JointPMF({{Var::X, sizes[0]}, {Var::Y, sizes[1]}, {Var::U, sizes[2]}, {Var::V, sizes[3]}},
                  pmf);
}

std::vector<std::string> preset_names() {
  return {"constant", "dsbs", "sgarro", "compdel-dsbs", "markov", "degraded"};
}

SourceSpec make_preset(std::string_view name_view, const std::map<std::string, double>& given) {
  const std::string name(name_view);
  std::map<std::string, double> params;
  auto take = [&](const std::string& key, double def) {
    const double v = param(given, key, def);
    check_probability(name, key, v);
    params[key] = v;
    return v;
  };
  auto reject_unknown = [&] {
    for (const auto& [k, v] : given) {
      if (!params.count(k)) throw InputError("preset " + name + ": unknown parameter '" + k + "'");
    }
  };

  if (name == "constant") {
    reject_unknown();
    Builder b(name, params, 1, 1, 1, 1);
    b.add(0, 0, 0, 0, 1.0);
    return b.spec;
  }
  if (name == "dsbs" || name == "compdel-dsbs") {
    // X uniform, Y = X xor Bern(q); the compdel variant adds U = Y, V = X.
    const double q = take("q", 0.25);
    reject_unknown();
    const bool cd = name == "compdel-dsbs";
    Builder b(name, params, 2, 2, cd ? 2 : 1, cd ? 2 : 1);
    for (std::size_t x = 0; x < 2; ++x) {
      for (std::size_t y = 0; y < 2; ++y) {
        const double p = (x == y ? 1.0 - q : q) / 2.0;
        b.add(x, y, cd ? y : 0, cd ? x : 0, p);
      }
    }
    return b.spec;
  }
  if (name == "sgarro") {
    // X = Y uniform, U = X xor Bern(a), V = X xor Bern(b).
    const double a = take("a", 0.1);
    const double bn = take("b", 0.2);
    reject_unknown();
    Builder b(name, params, 2, 2, 2, 2);
    for (std::size_t x = 0; x < 2; ++x) {
      for (std::size_t u = 0; u < 2; ++u) {
        for (std::size_t v = 0; v < 2; ++v) {
          const double pu = u == x ? 1.0 - a : a;
          const double pv = v == x ? 1.0 - bn : bn;
          b.add(x, x, u, v, 0.5 * pu * pv);
        }
      }
    }
    return b.spec;
  }
  if (name == "markov") {
    // X uniform, Y = X xor Bern(q), U = Y, V constant.
    const double q = take("q", 0.3);
    reject_unknown();
    Builder b(name, params, 2, 2, 2, 1);
    for (std::size_t x = 0; x < 2; ++x) {
      for (std::size_t y = 0; y < 2; ++y) b.add(x, y, y, 0, (x == y ? 1.0 - q : q) / 2.0);
    }
    return b.spec;
  }
  if (name == "degraded") {
    // X uniform, Z = X xor Bern(q), Y = (X, Z) coded as 2x+z, U = Z xor Bern(r),
    // V constant.
    const double q = take("q", 0.25);
    const double r = take("r", 0.1);
    reject_unknown();
    Builder b(name, params, 2, 4, 2, 1);
    for (std::size_t x = 0; x < 2; ++x) {
      for (std::size_t z = 0; z < 2; ++z) {
        for (std::size_t u = 0; u < 2; ++u) {
          const double pz = z == x ? 1.0 - q : q;
          const double pu = u == z ? 1.0 - r : r;
          b.add(x, 2 * x + z, u, 0, 0.5 * pz * pu);
        }
      }
    }
    return b.spec;
  }
  throw InputError("unknown preset '" + name + "'");
}

SourceSpec parse_source(std::string_view text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw InputError("malformed source document: " + std::string(e.what()));
  }
  if (!doc.IsMap()) throw InputError("source document must be a mapping");

  try {
    if (const auto preset = doc["preset"]) {
      if (doc["pmf"] || doc["alphabets"]) {
        throw InputError("source document mixes 'preset' with 'alphabets'/'pmf'");
      }
      std::string name;
      std::map<std::string, double> params;
      if (preset.IsScalar()) {
        name = preset.as<std::string>();
      } else if (preset.IsMap()) {
        if (!preset["name"]) throw InputError("preset is missing 'name'" + where(preset));
        name = preset["name"].as<std::string>();
        if (const auto p = preset["params"]) {
          if (!p.IsMap()) throw InputError("preset params must be a mapping" + where(p));
          for (const auto& kv : p) params[kv.first.as<std::string>()] = kv.second.as<double>();
        }
      } else {
        throw InputError("preset must be a name or {name, params}" + where(preset));
      }
      return make_preset(name, params);
    }

    const auto alphabets = doc["alphabets"];
    if (!alphabets || !alphabets.IsMap()) {
      throw InputError("source document needs 'alphabets: {X: .., Y: .., U: .., V: ..}'");
    }
    SourceSpec spec;
    for (const auto& kv : alphabets) {
      const auto key = kv.first.as<std::string>();
      bool known = false;
      for (const char* k : kVarKeys) known = known || key == k;
      if (!known) throw InputError("alphabets: unknown variable '" + key + "'" + where(kv.first));
    }
    std::size_t expected = 1;
    for (std::size_t a = 0; a < 4; ++a) {
      const auto node = alphabets[kVarKeys[a]];
      if (!node) {
        throw InputError(std::string("alphabets: missing size of ") + kVarKeys[a] +
                         where(alphabets));
      }
      const long long n = node.as<long long>();
      if (n < 1 || n > 255) {
        throw InputError(std::string("alphabets.") + kVarKeys[a] + " must be in [1,255]" +
                         where(node));
      }
      spec.sizes[a] = static_cast<std::size_t>(n);
      expected *= spec.sizes[a];
    }
    const auto pmf = doc["pmf"];
    if (!pmf || !pmf.IsSequence()) throw InputError("source document needs 'pmf: [..]'");
    for (const auto& v : pmf) spec.pmf.push_back(v.as<double>());
    if (spec.pmf.size() != expected) {
      throw InputError("pmf has " + std::to_string(spec.pmf.size()) + " entries, expected " +
                       std::to_string(expected) + where(pmf));
    }
    if (auto bad = validate_pmf(spec.joint())) throw InputError("pmf: " + *bad + where(pmf));
    return spec;
  } catch (const YAML::Exception& e) {
    throw InputError("source document: " + std::string(e.what()));
  }
}

}  // namespace gwsi::cli
