#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "fracslow/core/error.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/drift/drift.hpp"
#include "fracslow/integrate/types.hpp"

namespace fracslow::cli {

using json = nlohmann::json;

enum class ParamType { number, integer, boolean, string, numbers, matrix, drift, coefficient };

inline std::string to_string(ParamType t) {
  switch (t) {
    case ParamType::number: return "number";
    case ParamType::integer: return "integer";
    case ParamType::boolean: return "bool";
    case ParamType::string: return "string";
    case ParamType::numbers: return "list of numbers";
    case ParamType::matrix: return "number or square matrix";
    case ParamType::drift: return "drift";
    case ParamType::coefficient: return "coefficient";
  }
  return "?";
}

/// One documented parameter. A null default marks an optional value that is
/// absent unless given.
struct ParamSpec {
  std::string name;
  ParamType type;
  json default_value;
  std::string doc;
};

struct KindSpec {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;

  const ParamSpec* find(const std::string& key) const {
    for (const auto& p : params)
      if (p.name == key) return &p;
    return nullptr;
  }
};

/// A named kind plus parameter overrides.
struct Preset {
  std::string name;
  std::string kind;
  std::string summary;
  json params;
};

inline constexpr int kCatalogVersion = 1;

inline std::string library_version() {
#ifdef FRACSLOW_VERSION
  return FRACSLOW_VERSION;
#else
  return "0.0.0";
#endif
}

namespace detail {

inline json linear_drift(double rate) { return {{"kind", "linear"}, {"rate", rate}}; }

inline std::vector<ParamSpec> certification_params() {
  return {{"certify", ParamType::boolean, false, "run the contractivity check before the experiment"},
          {"kappa", ParamType::number, 1.0, "certificate: contraction rate"},
          {"R", ParamType::number, 0.0, "certificate: radius outside which contraction is required"},
          {"cert_lambda", ParamType::number, 0.0, "certificate: repulsivity allowance"},
          {"force", ParamType::boolean, false, "run even if the certificate fails"}};
}

inline std::vector<ParamSpec> with(std::vector<ParamSpec> a, const std::vector<ParamSpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace detail

/// The experiment catalog. Order and content are part of the catalog version.
inline const std::vector<KindSpec>& catalog() {
  static const std::vector<KindSpec> kinds = [] {
    using T = ParamType;
    const json null;
    std::vector<KindSpec> k;
    k.push_back({"noise-validate",
                 "fBm variance law and lag-1 increment covariance against their exact values",
                 {{"hurst", T::numbers, {0.55, 0.7, 0.9}, "Hurst indices to check"},
                  {"n_paths", T::integer, 200, "paths per Hurst index"},
                  {"n_steps", T::integer, 4096, "steps per path"},
                  {"dt", T::number, 1.0, "grid step"},
                  {"lags", T::numbers, {1, 2, 4, 8, 16, 32, 64}, "lags (in steps) of the variance check"},
                  {"method", T::string, "circulant-embedding", "circulant-embedding | cholesky | riemann-liouville-kernel"},
                  {"z_max", T::number, 3.0, "acceptance: largest |z| of a variance residual"},
                  {"cov_z_max", T::number, 4.0, "acceptance: largest |z| of the lag-1 covariance residual"}}});
    k.push_back({"certify-drift",
                 "numerical S(kappa, R, lambda) membership certificate of a drift frozen at x",
                 {{"drift", T::drift, detail::linear_drift(1.0), "drift record"},
                  {"x", T::numbers, json::array(), "slow input (empty: zero)"},
                  {"kappa", T::number, 1.0, "contraction rate"},
                  {"R", T::number, 0.0, "radius"},
                  {"lambda", T::number, 0.0, "repulsivity allowance"},
                  {"n_samples", T::integer, 4096, "quasi-random pairs tested"},
                  {"box", T::number, 0.0, "sampling box radius (0: max(4 (R + 1), 8))"},
                  {"variant", T::string, "both-outside", "both-outside | one-outside"}}});
    k.push_back({"wasserstein-decay",
                 "synchronous coupling of two ensembles; W^p distance against time with rate fits",
                 detail::with({{"drift", T::drift, detail::linear_drift(1.0), "fast drift"},
                               {"sigma", T::matrix, 1.0, "noise matrix (a number means that multiple of I)"},
                               {"hurst", T::number, 0.7, "Hurst index"},
                               {"x", T::numbers, json::array(), "slow input (empty: zero)"},
                               {"y0_a", T::numbers, json::array({2.0}), "start of the first ensemble"},
                               {"y0_b", T::numbers, json::array({-2.0}), "start of the second ensemble"},
                               {"t_grid", T::numbers, {0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4}, "output times"},
                               {"n_paths", T::integer, 500, "ensemble size"},
                               {"p", T::number, 1.0, "Wasserstein order"},
                               {"dt", T::number, 1.0 / 64, "integration step"},
                               {"n_boot", T::integer, 200, "bootstrap resamples for the SE"},
                               {"rate_min", T::number, null, "acceptance: smallest fitted exponential rate"},
                               {"rate_max", T::number, null, "acceptance: largest fitted exponential rate"},
                               {"min_r_squared", T::number, null, "acceptance: smallest r^2 of the exponential fit"},
                               {"require_exponential", T::boolean, false, "acceptance: exponential model beats algebraic"}},
                              detail::certification_params())});
    k.push_back({"tv-decay",
                 "two-stage Girsanov coupling bound on TV(law Y_t, pi) next to histogram TV",
                 detail::with({{"drift", T::drift, detail::linear_drift(1.0), "fast drift"},
                               {"sigma", T::matrix, 1.0, "noise matrix"},
                               {"hurst", T::number, 0.7, "Hurst index"},
                               {"x", T::numbers, json::array(), "slow input (empty: zero)"},
                               {"y0", T::numbers, json::array({1.0}), "start of the non-stationary copy"},
                               {"t_grid", T::numbers, {2, 2.5, 3, 3.5, 4, 4.5, 5, 5.5}, "coupling start times"},
                               {"n_paths", T::integer, 200, "ensemble size"},
                               {"dt", T::number, 1.0 / 256, "integration step (1/dt integer)"},
                               {"burn_in", T::number, 10.0, "head start of the stationary copy"},
                               {"n_boot", T::integer, 100, "bootstrap resamples for the histogram SE"},
                               {"delta_rate", T::number, null, "rate c in delta(t) = exp(-c t / 2) (absent: fitted)"},
                               {"lambda", T::number, 0.0, "repulsivity allowance of the coupling"},
                               {"require_decreasing", T::boolean, false, "acceptance: the bound is non-increasing"},
                               {"require_dominates", T::boolean, false, "acceptance: bound >= histogram TV at every time"}},
                              detail::certification_params())});
    k.push_back({"quenched-decay",
                 "Riemann-Liouville driven dynamics under a power-law adversary against the stationary cloud",
                 detail::with({{"drift", T::drift, detail::linear_drift(1.0), "fast drift"},
                               {"sigma", T::matrix, 1.0, "noise matrix"},
                               {"hurst", T::number, 0.7, "Hurst index"},
                               {"x", T::numbers, json::array(), "slow input (empty: zero)"},
                               {"adversary_scale", T::number, 1.0, "scale of the adversary derivative (0: none)"},
                               {"adversary_decay", T::number, 0.4, "decay exponent of the adversary derivative"},
                               {"initial", T::string, "point", "point | invariant"},
                               {"y0", T::numbers, json::array({0.0}), "initial point when initial = point"},
                               {"t_grid", T::numbers, {4, 8, 16, 32, 64, 128}, "output times"},
                               {"n_paths", T::integer, 1000, "ensemble size"},
                               {"dt", T::number, 1.0 / 32, "integration step"},
                               {"n_boot", T::integer, 200, "bootstrap resamples for the SE"},
                               {"invariant_samples", T::integer, 0, "reference cloud size (0: n_paths)"},
                               {"invariant_burn_in", T::number, 0.0, "reference cloud burn-in (0: default rule)"},
                               {"p", T::number, 1.0, "Wasserstein order"},
                               {"max_slope", T::number, null, "acceptance: largest algebraic slope"},
                               {"require_algebraic", T::boolean, false, "acceptance: algebraic model beats exponential"}},
                              detail::certification_params())});
    k.push_back({"control",
                 "two-piece universal control with trigger logic over an adversary battery",
                 {{"drift", T::drift, detail::linear_drift(1.0), "fast drift"},
                  {"kappa", T::number, 1.0, "contraction rate outside R"},
                  {"kappa_bar", T::number, 0.5, "reduced rate used for the radius enlargement"},
                  {"R", T::number, 0.0, "contraction radius"},
                  {"R_bar", T::number, null, "enlarged radius (absent: computed)"},
                  {"eta", T::number, 0.25, "occupation target in (0, 1/2)"},
                  {"C", T::number, 1.0, "a-priori constant of the smallness condition"},
                  {"N", T::integer, null, "number of subintervals (absent: smallest admissible)"},
                  {"steps_per_subinterval", T::integer, 20, "grid steps per subinterval"},
                  {"n_runs", T::integer, 100, "battery size"},
                  {"hurst", T::number, 0.7, "Hurst index of the fBm battery members"},
                  {"depth", T::number, 4.0, "truncation depth of the Wiener past"},
                  {"x0_min", T::number, -10.0, "initial points are spread evenly on [x0_min, x0_max]"},
                  {"x0_max", T::number, 10.0, "see x0_min"},
                  {"magnitude_scale", T::number, 1.0, "multiplier on the constructed control"},
                  {"require_all", T::boolean, true, "acceptance: every run reaches eta"}}});
    k.push_back({"averaging",
                 "slow-fast system against its averaged equation over an epsilon ladder",
                 {{"f", T::coefficient, {{"wx", -1.0}, {"wy", 1.0}}, "slow drift coefficient"},
                  {"g", T::coefficient, 1.0, "slow diffusion coefficient"},
                  {"drift", T::drift, {{"kind", "mean-field"}, {"m", "sin"}, {"rate", 1.0}}, "fast drift"},
                  {"sigma", T::matrix, 1.0, "fast noise matrix"},
                  {"hurst", T::number, 0.7, "Hurst index of the slow noise"},
                  {"hurst_fast", T::number, 0.6, "Hurst index of the fast noise"},
                  {"x0", T::numbers, json::array({0.0}), "slow initial value"},
                  {"y0", T::numbers, json::array({0.0}), "fast initial value"},
                  {"T", T::number, 1.0, "horizon"},
                  {"dt_slow", T::number, 1.0 / 1024, "slow step"},
                  {"epsilons", T::numbers, {0.1, 0.05, 0.02, 0.01}, "epsilon ladder"},
                  {"n_paths", T::integer, 50, "paths per epsilon"},
                  {"alpha", T::number, null, "Holder exponent of the error norm (absent: default rule)"},
                  {"route", T::string, "automatic", "automatic | analytic | table"},
                  {"fast_resolution", T::integer, 32, "fast steps per unit of epsilon"},
                  {"n_boot", T::integer, 500, "bootstrap resamples for the median CI"},
                  {"method", T::string, "circulant-embedding", "fBm generator"},
                  {"table_x_min", T::number, -3.0, "table route: first node"},
                  {"table_x_max", T::number, 3.0, "table route: last node"},
                  {"table_nodes", T::integer, 17, "table route: node count"},
                  {"table_samples", T::integer, 1000, "table route: invariant samples per node"},
                  {"require_decreasing", T::boolean, false, "acceptance: medians decrease within CI"},
                  {"min_ratio", T::number, null, "acceptance: smallest sup-error ratio first/last epsilon"},
                  {"within_self_convergence", T::boolean, false,
                   "acceptance: every median sup error is at most the integrator self-convergence tolerance"}}});
    k.push_back({"invariant-measure",
                 "sample cloud of the frozen fast equation after burn-in",
                 {{"drift", T::drift, detail::linear_drift(1.0), "fast drift"},
                  {"sigma", T::matrix, 1.0, "noise matrix"},
                  {"hurst", T::number, 0.7, "Hurst index"},
                  {"x", T::numbers, json::array(), "slow input (empty: zero)"},
                  {"n_samples", T::integer, 1000, "cloud size"},
                  {"burn_in", T::number, 0.0, "burn-in time (0: default rule at certified_kappa)"},
                  {"certified_kappa", T::number, null, "contraction rate for the burn-in rule"},
                  {"dt", T::number, 1.0 / 256, "integration step"},
                  {"method", T::string, "circulant-embedding", "fBm generator"},
                  {"oracle_z_max", T::number, null,
                   "acceptance (linear drift only): largest |z| of the variance against the closed form"}}});
    return k;
  }();
  return kinds;
}

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> p{
      {"averaging-principle", "averaging",
       "test system f = -x + y, g = 1, b = -(y - sin x); medians must fall along the ladder by a factor >= 2",
       {{"require_decreasing", true}, {"min_ratio", 2.0}}},
      {"geometric-ergodicity-wasserstein", "wasserstein-decay",
       "b = -y at H = 0.7: exponential W1 decay at rate 1",
       {{"n_paths", 2000}, {"rate_min", 0.8}, {"rate_max", 1.2}, {"min_r_squared", 0.95}}},
      {"geometric-ergodicity-tv", "tv-decay", "1D linear case: coupling TV bound decreasing and above histogram TV",
       {{"require_decreasing", true}, {"require_dominates", true}}},
      {"quenched-ergodicity", "quenched-decay", "power-law adversary t^-0.4: algebraic, not exponential, decay",
       {{"max_slope", -0.15}, {"require_algebraic", true}}},
      {"universal-control", "control", "exterior occupation >= eta over a 100-member battery", json::object()},
  };
  return p;
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

inline std::string nearest(const std::string& s, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t d = std::numeric_limits<std::size_t>::max();
  for (const auto& c : candidates)
    if (const auto e = edit_distance(s, c); e < d) d = e, best = c;
  return best;
}

inline std::vector<std::string> kind_names() {
  std::vector<std::string> out;
  for (const auto& k : catalog()) out.push_back(k.name);
  return out;
}

inline const KindSpec& find_kind(const std::string& name) {
  for (const auto& k : catalog())
    if (k.name == name) return k;
  throw SchemaError("unknown experiment kind '" + name + "'; nearest match: '" + nearest(name, kind_names()) + "'");
}

inline const Preset& find_preset(const std::string& name) {
  std::vector<std::string> names;
  for (const auto& p : presets()) {
    if (p.name == name) return p;
    names.push_back(p.name);
  }
  throw SchemaError("unknown preset '" + name + "'; nearest match: '" + nearest(name, names) + "'");
}

// ---------------------------------------------------------------------------
// YAML -> JSON

inline json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& e : n) a.push_back(yaml_to_json(e));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (o.contains(key)) throw SchemaError("config: duplicate key '" + key + "'");
        o[key] = yaml_to_json(kv.second);
      }
      return o;
    }
    case YAML::NodeType::Scalar: break;
  }
  const std::string s = n.Scalar();
  if (n.Tag() == "!") return s;  // quoted
  if (s == "~" || s == "null") return nullptr;
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  {
    std::int64_t v;
    std::istringstream is(s);
    if (is >> v && is.peek() == EOF) return v;
  }
  {
    double v;
    if (YAML::convert<double>::decode(n, v)) return v;
  }
  return s;
}

/// Parses YAML, or JSON (which YAML reading would also accept, but JSON keeps
/// exact integer/float distinctions).
inline json parse_config_text(const std::string& text, const std::string& origin = "config") {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw SchemaError(origin + ": invalid JSON: " + e.what());
    }
  }
  try {
    return yaml_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw SchemaError(origin + ": invalid YAML: " + e.what());
  }
}

inline json read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Schema validation

namespace detail {

inline void check_type(const std::string& where, const ParamSpec& spec, const json& v) {
  auto fail = [&](const std::string& why) {
    throw SchemaError(where + "." + spec.name + ": expected " + to_string(spec.type) + (why.empty() ? "" : " (" + why + ")"));
  };
  if (spec.default_value.is_null() && v.is_null()) return;
  switch (spec.type) {
    case ParamType::number:
      if (!v.is_number()) fail("");
      break;
    case ParamType::integer:
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail("non-negative whole number");
      break;
    case ParamType::boolean:
      if (!v.is_boolean()) fail("");
      break;
    case ParamType::string:
      if (!v.is_string()) fail("");
      break;
    case ParamType::numbers:
      if (!v.is_array()) fail("");
      for (const auto& e : v)
        if (!e.is_number()) fail("non-numeric entry");
      break;
    case ParamType::matrix:
      if (v.is_number()) break;
      if (!v.is_array() || v.empty()) fail("");
      for (const auto& r : v) {
        if (!r.is_array() || r.size() != v.size()) fail("rows must have as many entries as there are rows");
        for (const auto& e : r)
          if (!e.is_number()) fail("non-numeric entry");
      }
      break;
    case ParamType::drift: {
      static const std::vector<std::string> keys{"kind", "dim", "dim_x", "dim_y", "rate", "offset",
                                                 "m",    "alpha", "beta", "rho",  "y",    "b"};
      if (!v.is_object()) fail("");
      for (const auto& [k, _] : v.items())
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
          throw SchemaError(where + "." + spec.name + ": unknown key '" + k + "'; nearest match: '" + nearest(k, keys) + "'");
      try {
        drift::drift_from_json(v);
      } catch (const json::exception& e) {
        fail(e.what());
      }
      break;
    }
    case ParamType::coefficient:
      try {
        integrate::coefficient_from_json(v);
      } catch (const json::exception& e) {
        fail(e.what());
      }
      break;
  }
}

}  // namespace detail

/// Validated experiment description. `params` holds every parameter of the
/// kind, defaults filled in.
struct ExperimentConfig {
  std::string kind;
  std::string name;
  std::string preset;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string output;
  json params = json::object();

  /// The part that determines the results; workers and output are excluded.
  json canonical() const { return {{"kind", kind}, {"seed", seed}, {"params", params}}; }

  /// 16 hex digits of FNV-1a over the canonical JSON (keys sorted).
  std::string hash() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fracslow::detail::fnv1a(canonical().dump())));
    return buf;
  }

  json to_json() const {
    json j{{"kind", kind}, {"name", name}, {"seed", seed}, {"params", params}};
    if (!preset.empty()) j["preset"] = preset;
    return j;
  }
};

inline bool is_replay_record(const json& j) { return j.is_object() && j.value("format", std::string{}) == "fracslow-replay"; }

/// Validates a parsed config (or unwraps a replay record) before any computation.
inline ExperimentConfig resolve_config(const json& raw) {
  if (is_replay_record(raw)) {
    if (!raw.contains("config")) throw SchemaError("replay record without 'config'");
    return resolve_config(raw.at("config"));
  }
  if (!raw.is_object()) throw SchemaError("config: expected a mapping at the top level");
  static const std::vector<std::string> top{"kind", "preset", "name", "seed", "workers", "output", "params"};
  for (const auto& [k, _] : raw.items())
    if (std::find(top.begin(), top.end(), k) == top.end())
      throw SchemaError("config: unknown key '" + k + "'; nearest match: '" + nearest(k, top) + "'");

  ExperimentConfig c;
  json overrides = json::object();
  if (raw.contains("preset")) {
    if (!raw["preset"].is_string()) throw SchemaError("config.preset: expected string");
    const auto& p = find_preset(raw["preset"].get<std::string>());
    c.preset = p.name;
    c.kind = p.kind;
    overrides = p.params;
    if (raw.contains("kind") && raw["kind"] != p.kind)
      throw SchemaError("config: preset '" + p.name + "' is of kind '" + p.kind + "'");
  } else {
    if (!raw.contains("kind") || !raw["kind"].is_string()) throw SchemaError("config: missing 'kind' (or 'preset')");
    c.kind = raw["kind"].get<std::string>();
  }
  const auto& spec = find_kind(c.kind);

  if (raw.contains("seed")) {
    const auto& s = raw["seed"];
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0))
      throw SchemaError("config.seed: expected a non-negative integer");
    c.seed = raw["seed"].get<std::uint64_t>();
  }
  if (raw.contains("workers")) {
    if (!raw["workers"].is_number_integer() || raw["workers"].get<std::int64_t>() < 0)
      throw SchemaError("config.workers: expected a non-negative integer");
    c.workers = raw["workers"].get<std::size_t>();
  }
  if (raw.contains("output")) {
    if (!raw["output"].is_string()) throw SchemaError("config.output: expected string");
    c.output = raw["output"].get<std::string>();
  }
  c.name = c.preset.empty() ? c.kind : c.preset;
  if (raw.contains("name")) {
    if (!raw["name"].is_string() || raw["name"].get<std::string>().empty()) throw SchemaError("config.name: expected a non-empty string");
    c.name = raw["name"].get<std::string>();
    if (c.name.find_first_of("/\\") != std::string::npos || c.name == "." || c.name == "..")
      throw SchemaError("config.name: must not contain path separators");
  }

  json given = raw.value("params", json::object());
  if (!given.is_object()) throw SchemaError("config.params: expected a mapping");
  overrides.update(given);
  std::vector<std::string> names;
  for (const auto& p : spec.params) names.push_back(p.name);
  for (const auto& [k, v] : overrides.items()) {
    const auto* p = spec.find(k);
    if (!p) throw SchemaError(c.kind + ": unknown parameter '" + k + "'; nearest match: '" + nearest(k, names) + "'");
    detail::check_type(c.kind, *p, v);
  }
  for (const auto& p : spec.params) c.params[p.name] = overrides.contains(p.name) ? overrides[p.name] : p.default_value;
  return c;
}

inline ExperimentConfig load_config(const std::string& path) { return resolve_config(read_config_file(path)); }

inline json catalog_json() {
  json kinds = json::array();
  for (const auto& k : catalog()) {
    json ps = json::array();
    for (const auto& p : k.params)
      ps.push_back({{"name", p.name}, {"type", to_string(p.type)}, {"default", p.default_value}, {"doc", p.doc}});
    kinds.push_back({{"kind", k.name}, {"summary", k.summary}, {"params", ps}});
  }
  json pre = json::array();
  for (const auto& p : presets()) pre.push_back({{"preset", p.name}, {"kind", p.kind}, {"summary", p.summary}, {"params", p.params}});
  return {{"catalog_version", kCatalogVersion}, {"library_version", library_version()}, {"kinds", kinds}, {"presets", pre}};
}

inline void print_catalog(std::ostream& os) {
  os << "fracslow " << library_version() << " experiment catalog v" << kCatalogVersion << "\n\n";
  for (const auto& k : catalog()) {
    os << k.name << "\n  " << k.summary << "\n";
    for (const auto& p : k.params)
      os << "    " << p.name << " (" << to_string(p.type) << ", default " << (p.default_value.is_null() ? "unset" : p.default_value.dump())
         << "): " << p.doc << "\n";
    os << "\n";
  }
  os << "presets\n";
  for (const auto& p : presets()) os << "  " << p.name << " [" << p.kind << "]: " << p.summary << "\n";
}

}  // namespace fracslow::cli
