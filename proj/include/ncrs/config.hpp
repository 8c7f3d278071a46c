#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ncrs/errors.hpp"
#include "ncrs/links.hpp"
#include "ncrs/objectives.hpp"
#include "ncrs/oracles.hpp"
#include "ncrs/schedule.hpp"

// Experiment configuration.
//
// A config is a JSON document. Every key must appear in default_config();
// unknown keys are rejected with their dotted path. Overrides `a.b.c=value`
// are applied after the file is read (last writer wins); the value is parsed
// as JSON when possible and taken as a string otherwise.
//
// In a sweep, any array-valued leaf other than `seeds` is an axis. The plan
// is the cartesian product of all axes (keys in sorted order, last key
// varying fastest) crossed with the seed list.

namespace ncrs {

using json = nlohmann::json;

inline json default_config() {
  return json::parse(R"({
    "problem": {
      "d": 50,
      "k": 5,
      "inner": "quadratic_cosine",
      "amplitude": 1.0,
      "frequency": 3.0,
      "tau": 0.0,
      "m": 0,
      "init_radius": "auto"
    },
    "oracle": {
      "kind": "sign",
      "p": 0.5,
      "link": "logistic",
      "scale": 1.0,
      "votes": 1
    },
    "algorithm": {
      "kind": "ncrs",
      "schedule": "theory_constant",
      "alpha0": 1.0,
      "alpha": "auto",
      "mu": 0.0001,
      "T": 10000,
      "max_rate": 0.04,
      "min_rate": 0.004,
      "decay_steps": 480,
      "epsilon": 0.25,
      "epsilon_relative": true,
      "horizon_search": {
        "enabled": false,
        "T_min": 64,
        "T_max": 10000000,
        "steps_per_doubling": 8
      }
    },
    "seeds": [1, 2, 3, 4, 5]
  })");
}

namespace detail {

inline void reject_unknown(const json& user, const json& schema, const std::string& prefix) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!schema.contains(it.key())) throw ConfigError("unknown config key '" + path + "'");
    const json& sub = schema.at(it.key());
    if (sub.is_object()) {
      if (!it.value().is_object()) throw ConfigError("config key '" + path + "' must be an object");
      reject_unknown(it.value(), sub, path);
    } else if (it.value().is_object()) {
      throw ConfigError("config key '" + path + "' must not be an object");
    }
  }
}

inline std::vector<std::string> split_dotted(std::string_view key) {
  std::vector<std::string> parts;
  std::string cur;
  for (const char c : key) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  for (const auto& p : parts) {
    if (p.empty()) throw ConfigError("malformed override key '" + std::string(key) + "'");
  }
  return parts;
}

}  // namespace detail

/// Applies `key.path=value` to `doc`.
inline void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form KEY=VALUE");
  }
  const auto parts = detail::split_dotted(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &doc;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override path '" + std::string(assignment.substr(0, eq)) + "' crosses a leaf");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError("override path '" + std::string(assignment.substr(0, eq)) + "' crosses a leaf");
  (*node)[parts.back()] = std::move(value);
}

/// Defaults merged with the user document, after checking every user key.
inline json resolve_config(const json& user) {
  if (!user.is_object()) throw ConfigError("config root must be an object");
  const json schema = default_config();
  detail::reject_unknown(user, schema, "");
  json merged = schema;
  merged.merge_patch(user);
  return merged;
}

inline json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json doc = json::parse(buf.str(), nullptr, false, true);
  if (doc.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
  return doc;
}

/// Reads a config file (or starts empty), applies overrides, merges defaults.
inline json load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
  json user = path ? load_config_file(*path) : json::object();
  for (const auto& o : overrides) apply_override(user, o);
  return resolve_config(user);
}

enum class AlgorithmKind { ncrs, ncrs_vote, rsgf };

inline std::string_view to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::ncrs: return "ncrs";
    case AlgorithmKind::ncrs_vote: return "ncrs_vote";
    case AlgorithmKind::rsgf: return "rsgf";
  }
  return "?";
}

/// A number, or "auto" for the recipe value.
struct AutoNumber {
  std::optional<double> value;
  bool is_auto() const noexcept { return !value.has_value(); }
};

struct ProblemSpec {
  std::size_t d = 0;
  std::size_t k = 0;
  InnerFunction inner;
  double tau = 0.0;
  std::size_t m = 0;
  AutoNumber init_radius;
};

struct OracleSpec {
  std::string kind;
  double p = 0.5;
  LinkFunction link;
  std::uint64_t votes = 1;
};

struct HorizonSearch {
  bool enabled = false;
  std::uint64_t T_min = 64;
  std::uint64_t T_max = 10000000;
  std::uint64_t steps_per_doubling = 8;
};

struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::ncrs;
  ScheduleKind schedule = ScheduleKind::theory_constant;
  AutoNumber alpha0;
  AutoNumber alpha;
  double mu = 1e-4;
  std::uint64_t T = 1;
  double max_rate = 0.0;
  double min_rate = 0.0;
  std::uint64_t decay_steps = 1;
  double epsilon = 0.25;
  bool epsilon_relative = true;
  HorizonSearch horizon_search;
};

/// One fully specified run (all axes collapsed to scalars).
struct RunConfig {
  ProblemSpec problem;
  OracleSpec oracle;
  AlgorithmSpec algorithm;
  json echo;
};

namespace detail {

inline double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError("config key '" + path + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("config key '" + path + "' must be finite");
  return x;
}

inline std::uint64_t get_count(const json& v, const std::string& path) {
  const double x = get_number(v, path);
  if (x < 0.0 || x != std::floor(x) || x > 9.0e18) {
    throw ConfigError("config key '" + path + "' must be a nonnegative integer");
  }
  return static_cast<std::uint64_t>(x);
}

inline std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError("config key '" + path + "' must be a string");
  return v.get<std::string>();
}

inline bool get_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError("config key '" + path + "' must be a boolean");
  return v.get<bool>();
}

inline AutoNumber get_auto_number(const json& v, const std::string& path) {
  if (v.is_string()) {
    if (v.get<std::string>() == "auto") return {};
    throw ConfigError("config key '" + path + "' must be a number or \"auto\"");
  }
  return {get_number(v, path)};
}

}  // namespace detail

/// Typed view of a resolved single-run config. Throws ConfigError on any
/// invalid value or combination.
inline RunConfig parse_run_config(const json& doc) {
  RunConfig rc;
  rc.echo = doc;
  for (const auto& section : {"problem", "oracle", "algorithm"}) {
    for (auto it = doc.at(section).begin(); it != doc.at(section).end(); ++it) {
      if (it.value().is_array()) {
        throw ConfigError("config key '" + std::string(section) + "." + it.key() +
                          "' is a list; lists are only allowed in sweeps");
      }
    }
  }

  const json& pr = doc.at("problem");
  auto& p = rc.problem;
  p.d = detail::get_count(pr.at("d"), "problem.d");
  p.k = detail::get_count(pr.at("k"), "problem.k");
  p.inner.kind = parse_inner_kind(detail::get_string(pr.at("inner"), "problem.inner"));
  p.inner.amplitude = detail::get_number(pr.at("amplitude"), "problem.amplitude");
  p.inner.frequency = detail::get_number(pr.at("frequency"), "problem.frequency");
  p.tau = detail::get_number(pr.at("tau"), "problem.tau");
  p.m = detail::get_count(pr.at("m"), "problem.m");
  p.init_radius = detail::get_auto_number(pr.at("init_radius"), "problem.init_radius");
  if (p.d < 1) throw ConfigError("problem.d must be >= 1");
  if (p.k < 1 || p.k > p.d) throw ConfigError("problem.k must satisfy 1 <= k <= d");
  if (p.m > p.d - p.k) throw ConfigError("problem.m must satisfy m <= d - k");
  if (p.tau < 0.0) throw ConfigError("problem.tau must be >= 0");
  if (p.tau > 0.0 && p.m == 0) throw ConfigError("problem.tau > 0 needs problem.m >= 1");
  if (p.init_radius.value && !(*p.init_radius.value > 0.0)) throw ConfigError("problem.init_radius must be > 0");
  p.inner.validate();

  const json& orc = doc.at("oracle");
  auto& o = rc.oracle;
  o.kind = detail::get_string(orc.at("kind"), "oracle.kind");
  o.p = detail::get_number(orc.at("p"), "oracle.p");
  o.link.kind = parse_link_kind(detail::get_string(orc.at("link"), "oracle.link"));
  o.link.scale = detail::get_number(orc.at("scale"), "oracle.scale");
  o.votes = detail::get_count(orc.at("votes"), "oracle.votes");
  o.link.validate();

  const json& al = doc.at("algorithm");
  auto& a = rc.algorithm;
  const std::string kind = detail::get_string(al.at("kind"), "algorithm.kind");
  if (kind == "ncrs") {
    a.kind = AlgorithmKind::ncrs;
  } else if (kind == "ncrs_vote") {
    a.kind = AlgorithmKind::ncrs_vote;
  } else if (kind == "rsgf") {
    a.kind = AlgorithmKind::rsgf;
  } else {
    throw ConfigError("unknown algorithm kind '" + kind + "'");
  }
  a.schedule = parse_schedule_kind(detail::get_string(al.at("schedule"), "algorithm.schedule"));
  a.alpha0 = detail::get_auto_number(al.at("alpha0"), "algorithm.alpha0");
  a.alpha = detail::get_auto_number(al.at("alpha"), "algorithm.alpha");
  a.mu = detail::get_number(al.at("mu"), "algorithm.mu");
  a.T = detail::get_count(al.at("T"), "algorithm.T");
  a.max_rate = detail::get_number(al.at("max_rate"), "algorithm.max_rate");
  a.min_rate = detail::get_number(al.at("min_rate"), "algorithm.min_rate");
  a.decay_steps = detail::get_count(al.at("decay_steps"), "algorithm.decay_steps");
  a.epsilon = detail::get_number(al.at("epsilon"), "algorithm.epsilon");
  a.epsilon_relative = detail::get_bool(al.at("epsilon_relative"), "algorithm.epsilon_relative");
  const json& hs = al.at("horizon_search");
  a.horizon_search.enabled = detail::get_bool(hs.at("enabled"), "algorithm.horizon_search.enabled");
  a.horizon_search.T_min = detail::get_count(hs.at("T_min"), "algorithm.horizon_search.T_min");
  a.horizon_search.T_max = detail::get_count(hs.at("T_max"), "algorithm.horizon_search.T_max");
  a.horizon_search.steps_per_doubling =
      detail::get_count(hs.at("steps_per_doubling"), "algorithm.horizon_search.steps_per_doubling");

  if (a.T < 1) throw ConfigError("algorithm.T must be >= 1");
  if (!(a.epsilon > 0.0)) throw ConfigError("algorithm.epsilon must be > 0");
  if (a.alpha0.value && !(*a.alpha0.value > 0.0)) throw ConfigError("algorithm.alpha0 must be > 0");
  if (a.alpha.value && !(*a.alpha.value > 0.0)) throw ConfigError("algorithm.alpha must be > 0");
  if (a.horizon_search.enabled) {
    if (a.horizon_search.T_min < 1 || a.horizon_search.T_max < a.horizon_search.T_min) {
      throw ConfigError("algorithm.horizon_search needs 1 <= T_min <= T_max");
    }
    if (a.horizon_search.steps_per_doubling < 1) {
      throw ConfigError("algorithm.horizon_search.steps_per_doubling must be >= 1");
    }
  }

  switch (a.kind) {
    case AlgorithmKind::ncrs:
      if (o.kind != "sign") throw ConfigError("algorithm 'ncrs' needs oracle.kind = \"sign\"");
      if (!(o.p > 0.0 && o.p <= 0.5)) throw ConfigError("oracle.p must lie in (0, 0.5]");
      if (a.schedule == ScheduleKind::cosine_decay) {
        StepSchedule::cosine(a.max_rate, a.min_rate, a.decay_steps, a.T).validate();
      } else if (a.schedule == ScheduleKind::constant && a.alpha0.is_auto()) {
        throw ConfigError("the constant schedule needs a numeric algorithm.alpha0");
      }
      break;
    case AlgorithmKind::ncrs_vote:
      parse_confidence_kind(o.kind);
      if (o.votes < 1) throw ConfigError("oracle.votes must be >= 1");
      if (a.alpha.is_auto() && (a.epsilon_relative || !(a.epsilon < 1.0))) {
        throw ConfigError("algorithm.alpha = \"auto\" for ncrs_vote needs an absolute epsilon in (0, 1)");
      }
      break;
    case AlgorithmKind::rsgf:
      if (!(a.mu > 0.0)) throw ConfigError("algorithm.mu must be > 0");
      break;
  }
  if (a.horizon_search.enabled && a.kind != AlgorithmKind::ncrs) {
    throw ConfigError("algorithm.horizon_search is only supported for 'ncrs'");
  }
  return rc;
}

/// A sweep cell: a scalar config plus its stable hash.
struct SweepCell {
  json config;
  std::string hash;
};

struct SweepPlan {
  std::vector<SweepCell> cells;
  std::vector<std::uint64_t> seeds;
};

/// FNV-1a of the compact dump of the config without its seed list.
inline std::string cell_hash(json cell) {
  if (cell.is_object()) cell.erase("seeds");
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(cell.dump())));
  return buf;
}

namespace detail {

struct Axis {
  json::json_pointer where;
  json values;
};

inline void collect_axes(const json& node, const json::json_pointer& at, std::vector<Axis>& out) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const auto child = at / it.key();
    if (it.value().is_object()) {
      collect_axes(it.value(), child, out);
    } else if (it.value().is_array()) {
      out.push_back({child, it.value()});
    }
  }
}

}  // namespace detail

/// Expands a resolved sweep document into cells. Every cell is validated
/// before the plan is returned.
inline SweepPlan expand_sweep(const json& resolved) {
  SweepPlan plan;
  const json& seeds = resolved.at("seeds");
  if (!seeds.is_array()) throw ConfigError("config key 'seeds' must be a list");
  for (const auto& s : seeds) plan.seeds.push_back(detail::get_count(s, "seeds"));

  json base = resolved;
  base.erase("seeds");
  std::vector<detail::Axis> axes;
  detail::collect_axes(base, json::json_pointer(), axes);
  for (const auto& axis : axes) {
    if (axis.values.empty()) return plan;
  }
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    json cell = base;
    for (std::size_t a = 0; a < axes.size(); ++a) cell[axes[a].where] = axes[a].values[idx[a]];
    try {
      parse_run_config(cell);
    } catch (const ConfigError& e) {
      throw ConfigError("sweep cell " + cell.dump() + ": " + e.what());
    }
    plan.cells.push_back({cell, cell_hash(cell)});
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].values.size()) break;
      idx[a] = 0;
      if (a == 0) return plan;
    }
    if (axes.empty()) return plan;
  }
}

}  // namespace ncrs
