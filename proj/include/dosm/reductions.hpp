#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dosm/doco.hpp"
#include "dosm/rewards.hpp"
#include "dosm/sets.hpp"

namespace dosm::reductions {

/// An online D-OCSM learner: step(t) returns the n x d decisions played in round t.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::string name() const = 0;
  virtual double alpha() const = 0;
  virtual const Matrix& step(const rewards::RewardSequence& seq, long t) = 0;
  /// Matrix-weighted exchanges performed in the latest round, over all inner engines.
  virtual int exchanges_last_round() const = 0;
  /// Per-node upper bound on the alpha-regret assembled from measured
  /// quantities of the run (inner linear regrets, consensus errors, and the
  /// algorithm's constant terms).
  virtual Vector certified_bound() const = 0;
};

/// Which regret decomposition certified_bound() reports.
enum class BoundKind {
  Lipschitz,  // inner regret + cG * cumulative pairwise consensus (c = 1, or 2 when monotone)
  Smooth,     // inner regret + squared consensus + gradient-gap cross term
};

/// Boosting reduction: the inner engine optimizes linear losses <-gradF, x>
/// built from one stochastic gradient per node per round.
class BoostingReduction final : public Learner {
 public:
  BoostingReduction(std::unique_ptr<doco::DocoEngine> inner, const sets::DecisionSet& set,
                    rewards::Mode mode, std::vector<Rng> sample_rngs, double G, double beta,
                    BoundKind bound = BoundKind::Lipschitz);

  std::string name() const override;
  double alpha() const override { return alpha_; }
  const Matrix& step(const rewards::RewardSequence& seq, long t) override;
  int exchanges_last_round() const override { return inner_->exchanges_last_round(); }
  Vector certified_bound() const override;

  rewards::Mode mode() const { return mode_; }
  const doco::DocoEngine& inner() const { return *inner_; }
  /// Preparatory decisions xhat of the latest round.
  const Matrix& preparatory() const { return prep_; }
  /// Linear-loss gradients fed to the inner engine in the latest round.
  const Matrix& fed() const { return fed_; }

  /// Per node i: sum_t sum_j <c_t^j, xhat_t^i> - min_{x in K} sum_t sum_j <c_t^j, x>,
  /// the inner engine's regret on the fed losses.
  Vector inner_regret() const;
  /// Per node i: sum_t sum_j ||xhat_t^j - xhat_t^i||.
  const Vector& pairwise_consensus() const { return pairwise_consensus_; }
  double gradient_bound() const { return G_; }
  BoundKind bound_kind() const { return bound_; }

  Vector lipschitz_bound() const;
  /// Inner regret + (beta/8) sum ||xhat^i - xhat^j||^2 + sum <a_t^j, xhat^j - xhat^i> with
  /// a = grad f(x^j)/2 - gradF(xhat^j); monotone mode uses beta/2 and a = grad f(xhat^j) - gradF(xhat^j).
  /// gradF is the boosted estimate fed to the engine, unbiased given xhat.
  Vector smooth_bound() const;

 private:
  std::unique_ptr<doco::DocoEngine> inner_;
  const sets::DecisionSet* set_;
  rewards::Mode mode_;
  std::vector<Rng> rngs_;
  double G_;
  double beta_;
  BoundKind bound_;
  double alpha_;
  Vector xinf_;
  Matrix prep_;
  Matrix played_;
  Matrix fed_;
  Matrix gap_;
  Vector loss_at_prep_;   // per node sum_t <sum_j c_t^j, xhat_t^i>
  Vector loss_total_;     // sum_t sum_j c_t^j
  Vector pairwise_consensus_;
  Vector pairwise_sq_;  // per node sum_t sum_j ||xhat_t^j - xhat_t^i||^2
  Vector cross_;        // per node sum_t sum_j <a_t^j, xhat_t^j - xhat_t^i>
};

/// Decentralized Meta-Frank-Wolfe over L inner engines.
///
/// At each block start node i runs x_{k+1} = x_k + (1/L) v_k (1 - x_k)
/// (elementwise) from x_1 = 0 with v_k from inner engine k, and plays x_{L+1}
/// for the whole block. A permutation of the block's rounds, shared by all
/// nodes, assigns round t_{q,k} to engine k, which receives the linear loss
/// with gradient grad f_t(x_k) (x_k - 1).
class Dmfw final : public Learner {
 public:
  Dmfw(std::vector<std::unique_ptr<doco::DocoEngine>> inner, const sets::DecisionSet& set,
       std::vector<Rng> grad_rngs, Rng permutation_rng, double G, double beta);

  std::string name() const override;
  double alpha() const override;
  const Matrix& step(const rewards::RewardSequence& seq, long t) override;
  int exchanges_last_round() const override { return exchanges_last_; }
  Vector certified_bound() const override;

  long block_size() const { return L_; }
  /// Chain points x_{q,1..L+1} of the current block; chain()[k] is n x d.
  const std::vector<Matrix>& chain() const { return chain_; }
  /// Engine index k (0-based) that receives the loss of in-block position p.
  const std::vector<long>& assignment() const { return assignment_; }
  const doco::DocoEngine& inner(long k) const { return *inner_[static_cast<std::size_t>(k)]; }
  /// Per node: sum_k (1 - 1/L)^(L-k) * (regret of engine k on its fed losses).
  Vector weighted_inner_regret() const;
  /// Per node i: sum_k sum_q sum_j ||v_{q,k}^j - v_{q,k}^i||.
  const Vector& direction_consensus() const { return direction_consensus_; }

 private:
  void begin_block(long q);

  std::vector<std::unique_ptr<doco::DocoEngine>> inner_;
  const sets::DecisionSet* set_;
  long L_;
  std::vector<Rng> rngs_;
  Rng perm_rng_;
  double G_;
  double beta_;
  std::vector<Matrix> chain_;
  std::vector<Matrix> directions_;
  std::vector<long> assignment_;
  Matrix fed_;
  int exchanges_last_ = 0;
  long rounds_seen_ = 0;
  std::vector<Vector> loss_at_v_;   // [k] per node
  std::vector<Vector> loss_total_;  // [k] summed loss vector
  Vector direction_consensus_;
};

/// Builds x_{1..L+1} from directions v_1..v_L (each n x d).
std::vector<Matrix> frank_wolfe_chain(const std::vector<Matrix>& directions);

struct UnbiasednessReport {
  bool ok = true;
  double worst_z = 0.0;  // largest |mean - target| / SE over coordinates and k
  std::string detail;
};

/// Monte Carlo over random permutations of block q: the gradient that engine k
/// would receive, grad f_{t_{q,k}}(x_k) (x_k - 1), must average to
/// (1/L) sum_{t in block} grad f_t(x_k) (x_k - 1) within `max_se` standard errors.
UnbiasednessReport permutation_unbiasedness_check(const rewards::RewardSequence& seq, long q,
                                                  const std::vector<Vector>& chain_points,
                                                  std::size_t node, int trials, Rng& rng,
                                                  double max_se = 4.0);

}  // namespace dosm::reductions
