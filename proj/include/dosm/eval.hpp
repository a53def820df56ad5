#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dosm/common.hpp"
#include "dosm/rewards.hpp"
#include "dosm/sets.hpp"

namespace dosm::eval {

enum class OptMethod { Grid, Ascent, Both };

struct OfflineOptimum {
  Vector x;
  double value = 0.0;
  std::string method;     // "grid" or "ascent": whichever attained `value`
  double grid_value = 0.0;
  double ascent_value = 0.0;
  /// Lipschitz slack of the grid: sup||grad Q|| * resolution * sqrt(d).
  double gap_estimate = 0.0;
  /// Set when the two methods disagree by more than gap_estimate.
  bool disagreement = false;
};

/// Maximizes the quadratic `objective` over `set`. Grid mode scans the lattice
/// of spacing `resolution` inside the set (d <= 4 only); ascent mode runs 32
/// multi-start projected gradient ascents.
OfflineOptimum offline_opt(const rewards::Quadratic& objective, const sets::DecisionSet& set,
                           double resolution, OptMethod method, Rng& rng);
OfflineOptimum offline_opt(const rewards::RewardSequence& seq, const sets::DecisionSet& set,
                           double resolution, OptMethod method, Rng& rng);

struct TraceRow {
  long round = 0;  // 1-based
  int node = 0;
  double inst_reward = 0.0;
  double cum_reward = 0.0;
  double alpha_regret = 0.0;
  double consensus_err = 0.0;
};

/// Per-round, per-node reward and alpha-regret series of one run.
struct RegretTrace {
  std::string algo;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::vector<TraceRow> rows;  // round-major

  std::size_t nodes() const;
  long rounds() const;
  /// Final alpha-regret per node.
  Vector final_regret() const;
  double max_consensus() const;
};

inline constexpr const char* kTraceHeader =
    "round,node,algo,alpha,seed,inst_reward,cum_reward,alpha_regret,consensus_err";

/// Shortest round-trip decimal representation without exponent.
std::string format_decimal(double v);

/// Writes an optional "# ..." comment line followed by the fixed header and
/// one row per (round, node). LF line endings.
void write_trace_csv(std::ostream& out, const RegretTrace& trace, const std::string& comment);
RegretTrace read_trace_csv(std::istream& in);

/// Decision dump: "round,node,x0,...,x{d-1}".
void write_decisions_csv(std::ostream& out, const std::vector<Matrix>& decisions,
                         const std::string& comment);
std::vector<Matrix> read_decisions_csv(std::istream& in);

/// Builds a RegretTrace round by round. The comparator is the full-horizon
/// point `x_star`; the per-row alpha-regret uses its prefix sums.
class TraceBuilder {
 public:
  TraceBuilder(const rewards::RewardSequence& seq, Vector x_star, double alpha, std::string algo,
               std::uint64_t seed);
  void add_round(long t, const Matrix& played);
  const RegretTrace& trace() const { return trace_; }
  RegretTrace take() { return std::move(trace_); }

 private:
  const rewards::RewardSequence* seq_;
  Vector x_star_;
  RegretTrace trace_;
  Vector cum_;
  double opt_prefix_ = 0.0;
};

/// Recomputes the trace from a decision history alone.
RegretTrace trace_from_decisions(const rewards::RewardSequence& seq,
                                 const std::vector<Matrix>& decisions, const Vector& x_star,
                                 double alpha, const std::string& algo, std::uint64_t seed);

/// R(t, i) = alpha * opt_t - cum_reward(t, i), with opt_t the comparator's
/// prefix value; result[t-1](i).
std::vector<Vector> alpha_regret(const RegretTrace& trace, double alpha,
                                 const std::vector<double>& opt_prefix);

struct SlopeFit {
  bool valid = false;
  double slope = 0.0;
  double intercept = 0.0;
  int used = 0;
  int excluded = 0;  // nonpositive points dropped
};

/// Least-squares slope of log(regret) against log(T). Needs at least 4
/// positive points; nonpositive values are excluded.
SlopeFit sublinearity_fit(const std::vector<std::pair<double, double>>& points);

/// sup_x |F_n(x) - cdf(x)|. Throws InputError on empty input.
template <class Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf);

/// |mean - target| <= max_se * sd / sqrt(N) in every coordinate.
bool mc_mean_test(const std::vector<Vector>& samples, const Vector& target, double max_se);
bool mc_mean_test(const std::vector<double>& samples, double target, double max_se);

}  // namespace dosm::eval

#include <algorithm>
#include <cmath>

namespace dosm::eval {

template <class Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  if (samples.empty()) throw InputError("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double f = cdf(samples[k]);
    worst = std::max({worst, std::abs(static_cast<double>(k + 1) / n - f),
                      std::abs(f - static_cast<double>(k) / n)});
  }
  return worst;
}

}  // namespace dosm::eval
