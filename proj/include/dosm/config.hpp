#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dosm/common.hpp"

namespace dosm::cli {

struct TopologySpec {
  std::string kind = "ring";  // path | ring | complete | star | random | file
  std::size_t nodes = 4;
  double edge_prob = 0.5;     // random only
  std::string file;           // file only
};

struct SetSpec {
  std::string kind = "box";  // box | capped_simplex | knapsack
  double budget = 1.0;
  std::vector<double> weights;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct RewardSpec {
  std::string mode = "nonmonotone";  // nonmonotone | monotone
  double noise = 0.0;
  double density = 0.5;
  double scale = 1.0;
};

struct AlgorithmSpec {
  std::string reduction = "boosting";  // boosting | dmfw
  std::string engine = "ad_ospa";      // ad_ospa | d_ftpl | d_ogd
  std::optional<long> L;
  std::optional<int> K;
  std::optional<double> eta;
  std::optional<double> theta;
};

struct OfflineSpec {
  std::string method = "ascent";  // grid | ascent | both
  double resolution = 0.005;
};

struct OutputSpec {
  std::string trace = "trace.csv";
  std::string decisions;  // empty: not written
  std::string sweep = "sweep.csv";
};

struct RunConfig {
  int version = 1;
  long horizon = 256;
  int dim = 2;
  TopologySpec topology;
  SetSpec set;
  RewardSpec rewards;
  AlgorithmSpec algorithm;
  OfflineSpec offline;
  OutputSpec output;
  std::vector<std::uint64_t> seeds{1};
  std::vector<long> horizons;  // sweep only
};

inline constexpr int kConfigVersion = 1;

/// Strict parse: unknown keys, wrong types and out-of-range values raise ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string to_json(const RunConfig& cfg);
/// FNV-1a of the canonical JSON form.
std::uint64_t config_hash(const RunConfig& cfg);
std::string hash_hex(std::uint64_t h);

}  // namespace dosm::cli
