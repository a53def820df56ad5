#include "dosm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dosm::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key \"" + key + "\"");
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
void maybe(const json& j, const std::string& key, const std::string& where, T& out) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

template <class T>
void maybe(const json& j, const std::string& key, const std::string& where, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = get<T>(j, key, where);
}

void one_of(const std::string& value, const std::set<std::string>& options, const std::string& where) {
  if (!options.count(value)) {
    std::string list;
    for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
    throw ConfigError(where + ": \"" + value + "\" is not one of " + list);
  }
}

void validate(const RunConfig& c) {
  if (c.version != kConfigVersion)
    throw ConfigError("version: unsupported config version " + std::to_string(c.version));
  if (c.horizon < 1) throw ConfigError("horizon: must be positive");
  if (c.dim < 1) throw ConfigError("dim: must be positive");
  one_of(c.topology.kind, {"path", "ring", "complete", "star", "random", "file"}, "topology.kind");
  if (c.topology.kind == "file" && c.topology.file.empty())
    throw ConfigError("topology.file: required for kind \"file\"");
  if (c.topology.kind != "file" && c.topology.nodes < 1) throw ConfigError("topology.nodes: must be positive");
  if (c.topology.edge_prob < 0.0 || c.topology.edge_prob > 1.0)
    throw ConfigError("topology.edge_prob: must lie in [0,1]");
  one_of(c.set.kind, {"box", "capped_simplex", "knapsack"}, "set.kind");
  const auto d = static_cast<std::size_t>(c.dim);
  if (!c.set.lower.empty() && c.set.lower.size() != d) throw ConfigError("set.lower: needs dim entries");
  if (!c.set.upper.empty() && c.set.upper.size() != d) throw ConfigError("set.upper: needs dim entries");
  if (c.set.kind == "knapsack" && c.set.weights.size() != d)
    throw ConfigError("set.weights: knapsack needs dim entries");
  one_of(c.rewards.mode, {"nonmonotone", "monotone"}, "rewards.mode");
  if (c.rewards.noise < 0.0) throw ConfigError("rewards.noise: must be nonnegative");
  if (c.rewards.density < 0.0 || c.rewards.density > 1.0) throw ConfigError("rewards.density: must lie in [0,1]");
  if (!(c.rewards.scale > 0.0)) throw ConfigError("rewards.scale: must be positive");
  one_of(c.algorithm.reduction, {"boosting", "dmfw"}, "algorithm.reduction");
  one_of(c.algorithm.engine, {"ad_ospa", "d_ftpl", "d_ogd"}, "algorithm.engine");
  if (c.algorithm.reduction == "dmfw" && c.algorithm.engine != "d_ftpl")
    throw ConfigError("algorithm.engine: dmfw runs over d_ftpl");
  if (c.algorithm.L && *c.algorithm.L < 1) throw ConfigError("algorithm.L: must be positive");
  if (c.algorithm.K && *c.algorithm.K < 1) throw ConfigError("algorithm.K: must be positive");
  one_of(c.offline.method, {"grid", "ascent", "both"}, "offline.method");
  if (c.offline.method != "ascent" && c.dim > 4)
    throw ConfigError("offline.method: grid search is limited to dim <= 4");
  if (!(c.offline.resolution > 0.0)) throw ConfigError("offline.resolution: must be positive");
  if (c.seeds.empty()) throw ConfigError("seeds: at least one seed required");
  for (long T : c.horizons)
    if (T < 1) throw ConfigError("horizons: entries must be positive");
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, {"version", "horizon", "dim", "topology", "set", "rewards", "algorithm",
                     "offline", "output", "seeds", "horizons"},
                 "config");
  if (!j.contains("version")) throw ConfigError("config: missing \"version\"");
  RunConfig c;
  c.version = get<int>(j, "version", "config");
  maybe(j, "horizon", "config", c.horizon);
  maybe(j, "dim", "config", c.dim);
  maybe(j, "seeds", "config", c.seeds);
  maybe(j, "horizons", "config", c.horizons);
  if (j.contains("topology")) {
    const auto& t = j["topology"];
    reject_unknown(t, {"kind", "nodes", "edge_prob", "file"}, "topology");
    maybe(t, "kind", "topology", c.topology.kind);
    maybe(t, "nodes", "topology", c.topology.nodes);
    maybe(t, "edge_prob", "topology", c.topology.edge_prob);
    maybe(t, "file", "topology", c.topology.file);
  }
  if (j.contains("set")) {
    const auto& s = j["set"];
    reject_unknown(s, {"kind", "budget", "weights", "lower", "upper"}, "set");
    maybe(s, "kind", "set", c.set.kind);
    maybe(s, "budget", "set", c.set.budget);
    maybe(s, "weights", "set", c.set.weights);
    maybe(s, "lower", "set", c.set.lower);
    maybe(s, "upper", "set", c.set.upper);
  }
  if (j.contains("rewards")) {
    const auto& r = j["rewards"];
    reject_unknown(r, {"mode", "noise", "density", "scale"}, "rewards");
    maybe(r, "mode", "rewards", c.rewards.mode);
    maybe(r, "noise", "rewards", c.rewards.noise);
    maybe(r, "density", "rewards", c.rewards.density);
    maybe(r, "scale", "rewards", c.rewards.scale);
  }
  if (j.contains("algorithm")) {
    const auto& a = j["algorithm"];
    reject_unknown(a, {"reduction", "engine", "L", "K", "eta", "theta"}, "algorithm");
    maybe(a, "reduction", "algorithm", c.algorithm.reduction);
    maybe(a, "engine", "algorithm", c.algorithm.engine);
    maybe(a, "L", "algorithm", c.algorithm.L);
    maybe(a, "K", "algorithm", c.algorithm.K);
    maybe(a, "eta", "algorithm", c.algorithm.eta);
    maybe(a, "theta", "algorithm", c.algorithm.theta);
  }
  if (j.contains("offline")) {
    const auto& o = j["offline"];
    reject_unknown(o, {"method", "resolution"}, "offline");
    maybe(o, "method", "offline", c.offline.method);
    maybe(o, "resolution", "offline", c.offline.resolution);
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    reject_unknown(o, {"trace", "decisions", "sweep"}, "output");
    maybe(o, "trace", "output", c.output.trace);
    maybe(o, "decisions", "output", c.output.decisions);
    maybe(o, "sweep", "output", c.output.sweep);
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const RunConfig& c) {
  json a = {{"reduction", c.algorithm.reduction}, {"engine", c.algorithm.engine}};
  if (c.algorithm.L) a["L"] = *c.algorithm.L;
  if (c.algorithm.K) a["K"] = *c.algorithm.K;
  if (c.algorithm.eta) a["eta"] = *c.algorithm.eta;
  if (c.algorithm.theta) a["theta"] = *c.algorithm.theta;
  json j = {
      {"version", c.version},
      {"horizon", c.horizon},
      {"dim", c.dim},
      {"topology",
       {{"kind", c.topology.kind}, {"nodes", c.topology.nodes}, {"edge_prob", c.topology.edge_prob},
        {"file", c.topology.file}}},
      {"set",
       {{"kind", c.set.kind}, {"budget", c.set.budget}, {"weights", c.set.weights},
        {"lower", c.set.lower}, {"upper", c.set.upper}}},
      {"rewards",
       {{"mode", c.rewards.mode}, {"noise", c.rewards.noise}, {"density", c.rewards.density},
        {"scale", c.rewards.scale}}},
      {"algorithm", a},
      {"offline", {{"method", c.offline.method}, {"resolution", c.offline.resolution}}},
      {"output",
       {{"trace", c.output.trace}, {"decisions", c.output.decisions}, {"sweep", c.output.sweep}}},
      {"seeds", c.seeds},
      {"horizons", c.horizons},
  };
  return j.dump();
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(to_json(cfg)); }

std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k, h >>= 4) s[static_cast<std::size_t>(k)] = digits[h & 0xf];
  return s;
}

}  // namespace dosm::cli
