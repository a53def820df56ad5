#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dosm/common.hpp"
#include "dosm/network.hpp"
#include "dosm/sets.hpp"

namespace dosm::doco {

/// Uniform on the unit ball: normalized Gaussian direction scaled by U^(1/d).
Vector ball_sample(Rng& rng, int d);

enum class Role { SmoothDoco, LinearDoco, Dftpl, DmfwInner };

struct EngineParams {
  long L = 1;         // block size
  int K = 1;          // accelerated-gossip budget per block
  double theta = 0.5;
  double eta = 1.0;   // perturbation magnitude
};

/// Theorem-prescribed parameters for each role:
///  - SmoothDoco: L = max(ceil(T^(1/3)), C), K = C, eta = G sqrt(d T L)
///  - LinearDoco: L = K = C, eta = G sqrt(d T L)
///  - Dftpl:      L = 2 ceil(ln(sqrt(n) T)/rho), eta = G sqrt(d T L)
///  - DmfwInner:  the D-FTPL tuple for horizon T (the caller passes T/L_outer)
EngineParams default_params(const network::SpectralProfile& profile, double G, int d, long T,
                            Role role);

/// Block structure of Meta-Frank-Wolfe over D-FTPL.
struct DmfwParams {
  long L = 1;             // outer block size (number of inner engines)
  long inner_L = 2;       // D-FTPL block size C'
  double inner_eta = 1.0;
  long padded_T = 0;      // smallest horizon >= T divisible by L * inner_L
};

/// L = Theta((T/C')^(1/3)) with C' = 2 ceil(ln(sqrt(n) T / L)/rho). Among L
/// values within a factor two of the target, one making T divisible by L*C'
/// is preferred; otherwise the horizon is padded.
DmfwParams dmfw_params(const network::SpectralProfile& profile, double G, int d, long T);

/// Smallest multiple of `block` that is >= T.
long pad_horizon(long T, long block);

/// Everything an engine needs besides its algorithm-specific parameters.
struct EngineContext {
  const network::MixingMatrix* mixing = nullptr;
  const sets::DecisionSet* set = nullptr;
  long horizon = 0;
  std::vector<Rng> node_rngs;  // one stream per node
  Vector initial;              // shared initial decision; defaults to lmo(0)
};

/// Per-node online linear optimizer with a bounded number of matrix-weighted
/// exchanges per round. The caller reads decisions() for the current round,
/// evaluates loss gradients at those points, and passes them to feed().
class DocoEngine {
 public:
  virtual ~DocoEngine() = default;

  virtual std::string name() const = 0;
  /// n x d, row i is node i's decision for the current round.
  virtual const Matrix& decisions() const = 0;
  /// Advance one round with the per-node loss gradients (n x d).
  void feed(const Matrix& grads);

  std::size_t nodes() const { return n_; }
  int dim() const { return d_; }
  long horizon() const { return horizon_; }
  /// Rounds completed so far.
  long round() const { return round_; }
  int exchanges_last_round() const { return exchanges_last_; }
  long total_exchanges() const { return exchanges_total_; }

 protected:
  explicit DocoEngine(const EngineContext& ctx);
  virtual void do_feed(const Matrix& grads) = 0;
  void count_exchange() { ++exchanges_now_; }

  const network::MixingMatrix& mixing() const { return *mixing_; }
  const sets::DecisionSet& set() const { return *set_; }

  const network::MixingMatrix* mixing_;
  const sets::DecisionSet* set_;
  std::size_t n_;
  int d_;
  long horizon_;
  long round_ = 0;
  std::vector<Rng> rngs_;
  Vector initial_;

 private:
  int exchanges_now_ = 0;
  int exchanges_last_ = 0;
  long exchanges_total_ = 0;
};

/// Accelerated decentralized online smooth projection-free algorithm.
///
/// Decisions are held fixed over blocks of L rounds. During the first K rounds
/// of block q >= 2 the delayed gradient sums z are mixed by the Chebyshev
/// recursion; at the end of the block z_q = z_{q,K} is committed, the block
/// gradient g_q restarts the recursion buffers, and the decision for block
/// q+1 is the average of L perturbed linear maximizers of -z_{q-1}.
class AdOspa final : public DocoEngine {
 public:
  AdOspa(EngineContext ctx, EngineParams params);

  std::string name() const override { return "ad_ospa"; }
  const Matrix& decisions() const override { return x_; }
  const EngineParams& params() const { return params_; }

  /// Committed z_q (row i for node i) after the latest completed block.
  const Matrix& z() const { return z_; }
  /// max_i ||z_q^i - mean z_q|| for every block q >= 2, in order.
  const std::vector<double>& z_consensus() const { return z_consensus_; }
  /// ||mean z_q - sum_{tau < q} mean g_tau|| for every block q >= 2.
  const std::vector<double>& z_mean_drift() const { return z_mean_drift_; }

 private:
  void do_feed(const Matrix& grads) override;
  void end_block(long q);

  EngineParams params_;
  Matrix x_;       // x_q, played in the current block
  Matrix z_;       // z_q
  Matrix z_prev_;  // z_{q-1}
  Matrix zk_;      // z_{q,k}
  Matrix zkm1_;    // z_{q,k-1}
  Matrix g_;       // gradient sum over the current block
  Vector mean_g_sum_;
  std::vector<double> z_consensus_;
  std::vector<double> z_mean_drift_;
};

/// Decentralized follow-the-perturbed-leader.
///
/// At the start of block q each node computes a preparatory decision by one
/// perturbed linear maximization against its gossip-averaged gradient history
/// sum_{tau <= q-2} g_tau. The first L/2 rounds of the block gossip these
/// preparatory decisions; the last L/2 rounds gossip the previous block's
/// gradient sums.
class Dftpl final : public DocoEngine {
 public:
  Dftpl(EngineContext ctx, EngineParams params);

  std::string name() const override { return "d_ftpl"; }
  const Matrix& decisions() const override { return x_; }
  const EngineParams& params() const { return params_; }

  /// max_i ||x_{q+1}^i - mean xhat_{q+1}|| measured when x_{q+1} is finalized.
  const std::vector<double>& x_consensus() const { return x_consensus_; }
  /// max_i ||g_{q-1}^i - mean g_{q-1,1}|| measured when g_{q-1} is finalized.
  const std::vector<double>& g_consensus() const { return g_consensus_; }

 private:
  void do_feed(const Matrix& grads) override;
  void begin_block(long q);
  void end_block(long q);

  EngineParams params_;
  Matrix x_;        // played x_q
  Matrix xbuf_;     // x_{q+1,k}
  Matrix xhat_mean_rows_;  // mean of the preparatory decisions, broadcast
  Matrix gbuf_;     // g_{q-1,k}
  Eigen::RowVectorXd gbuf_mean_;
  Matrix g_raw_;    // gradient sum of the current block
  Matrix g_hist_;   // sum_{tau <= q-2} g_tau
  std::vector<double> x_consensus_;
  std::vector<double> g_consensus_;
};

/// Projection-based decentralized online gradient descent: one gossip step on
/// the decisions followed by a projected step with rate R/(G sqrt(t)).
class Dogd final : public DocoEngine {
 public:
  Dogd(EngineContext ctx, double G);

  std::string name() const override { return "d_ogd"; }
  const Matrix& decisions() const override { return x_; }

 private:
  void do_feed(const Matrix& grads) override;

  double G_;
  Matrix x_;
};

enum class EngineKind { AdOspa, Dftpl, Dogd };

std::string to_string(EngineKind kind);
EngineKind engine_kind_from_string(const std::string& s);

/// Validates divisibility (T % L == 0, L even for D-FTPL, K <= L for AD-OSPA).
std::unique_ptr<DocoEngine> make_engine(EngineKind kind, EngineContext ctx,
                                        const EngineParams& params, double G);

}  // namespace dosm::doco
