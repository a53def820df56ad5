#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dosm/config.hpp"
#include "dosm/doco.hpp"
#include "dosm/eval.hpp"
#include "dosm/network.hpp"
#include "dosm/reductions.hpp"
#include "dosm/rewards.hpp"
#include "dosm/sets.hpp"

namespace dosm::cli {

network::Topology build_topology(const TopologySpec& spec, std::uint64_t seed);
sets::DecisionSet build_set(const SetSpec& spec, int d);
rewards::FamilyParams family_params(const RunConfig& cfg);

/// Network and decision set of a configuration.
struct Instance {
  network::Topology topology;
  network::MixingMatrix mixing;
  network::SpectralProfile profile;
  sets::DecisionSet set;
};

Instance build_instance(const RunConfig& cfg, std::uint64_t seed);

/// Block structure chosen for a horizon, before the reward sequence exists.
struct Plan {
  long nominal_T = 0;
  long padded_T = 0;
  long block = 1;  // L of the boosting engine, or L * C' under D-MFW
  long L = 1;      // engine block, or number of inner engines under D-MFW
  long inner_L = 2;  // D-FTPL block under D-MFW
};

Plan plan_horizon(const RunConfig& cfg, const Instance& inst, long T);

/// Builds the configured learner for a sequence of length plan.padded_T.
std::unique_ptr<reductions::Learner> make_learner(const RunConfig& cfg, const Instance& inst,
                                                  const Plan& plan,
                                                  const rewards::RewardSequence& seq,
                                                  std::uint64_t seed);

struct RunResult {
  std::string algo;
  std::uint64_t seed = 0;
  long nominal_T = 0;
  long padded_T = 0;
  double alpha = 0.0;
  eval::OfflineOptimum opt;
  eval::RegretTrace trace;
  std::vector<Matrix> decisions;  // filled when requested
  Vector final_regret;
  Vector certified_bound;
  double max_consensus = 0.0;
  double mean_exchanges = 0.0;
  int max_exchanges = 0;
  std::vector<std::string> warnings;
};

struct RunOptions {
  bool keep_trace = true;
  bool keep_decisions = false;
};

/// One seeded run at horizon T (padded when needed).
RunResult run_once(const RunConfig& cfg, std::uint64_t seed, long T, const RunOptions& opts = {});

struct SweepPoint {
  long T = 0;         // padded horizon the fit uses
  long nominal_T = 0;
  double mean_final_regret = 0.0;
  double se = 0.0;
  double mean_bound = 0.0;
  double bound_se = 0.0;
  double slope_so_far = 0.0;
  bool slope_valid = false;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  eval::SlopeFit regret_fit;
  eval::SlopeFit bound_fit;
  std::vector<std::string> warnings;
};

/// Runs every (T, seed) pair with `jobs` worker threads. The per-run statistic
/// is the mean over nodes of the final alpha-regret.
SweepResult run_sweep(const RunConfig& cfg, const std::vector<long>& horizons,
                      const std::vector<std::uint64_t>& seeds, int jobs);

void write_sweep_csv(std::ostream& out, const SweepResult& sweep, const std::string& comment);

/// Writes via a temporary file in the same directory, then renames.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace dosm::cli
