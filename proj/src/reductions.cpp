#include "dosm/reductions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dosm::reductions {

namespace {

void add_pairwise(const Matrix& rows, Vector& acc) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    for (Eigen::Index j = 0; j < rows.rows(); ++j)
      if (i != j) acc(i) += (rows.row(j) - rows.row(i)).norm();
}

double min_linear(const sets::DecisionSet& set, const Vector& c) {
  return c.dot(set.lmo(-c));
}

}  // namespace

BoostingReduction::BoostingReduction(std::unique_ptr<doco::DocoEngine> inner,
                                     const sets::DecisionSet& set, rewards::Mode mode,
                                     std::vector<Rng> sample_rngs, double G, double beta,
                                     BoundKind bound)
    : inner_(std::move(inner)),
      set_(&set),
      mode_(mode),
      rngs_(std::move(sample_rngs)),
      G_(G),
      beta_(beta),
      bound_(bound) {
  if (!inner_) throw ConfigError("boosting reduction needs an inner engine");
  if (rngs_.size() != inner_->nodes()) throw ConfigError("boosting: one RNG stream per node");
  xinf_ = set.inf_minimizer();
  alpha_ = mode == rewards::Mode::Monotone ? rewards::monotone_scale() : (1.0 - set.nu()) / 4.0;
  const auto n = static_cast<Eigen::Index>(inner_->nodes());
  played_ = Matrix::Zero(n, set.dim());
  fed_ = played_;
  gap_ = played_;
  prep_ = played_;
  loss_at_prep_ = Vector::Zero(n);
  loss_total_ = Vector::Zero(set.dim());
  pairwise_consensus_ = Vector::Zero(n);
  pairwise_sq_ = Vector::Zero(n);
  cross_ = Vector::Zero(n);
}

std::string BoostingReduction::name() const {
  return std::string(mode_ == rewards::Mode::Monotone ? "boost_monotone" : "boost") + "+" +
         inner_->name();
}

const Matrix& BoostingReduction::step(const rewards::RewardSequence& seq, long t) {
  if (inner_->round() != t)
    throw ConfigError("boosting: round " + std::to_string(t) + " requested, inner engine is at " +
                      std::to_string(inner_->round()));
  prep_ = inner_->decisions();
  for (std::size_t i = 0; i < inner_->nodes(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const Vector xhat = prep_.row(row).transpose();
    Vector est;
    if (mode_ == rewards::Mode::NonMonotone) {
      const double z = rewards::sample_Z(rngs_[i]);
      played_.row(row) = (0.5 * (xhat + xinf_)).transpose();
      est = rewards::boosted_grad_nonmonotone(seq, t, i, xhat, xinf_, z, rngs_[i]);
    } else {
      const double z = rewards::sample_Zprime(rngs_[i]);
      played_.row(row) = xhat.transpose();
      est = rewards::boosted_grad_monotone(seq, t, i, xhat, z, rngs_[i]);
    }
    fed_.row(row) = -est.transpose();
    const Vector exact = mode_ == rewards::Mode::NonMonotone
                             ? Vector(0.5 * seq.at(t, i).grad(played_.row(row).transpose()))
                             : seq.at(t, i).grad(xhat);
    gap_.row(row) = exact.transpose() - est.transpose();
  }
  const Vector total = fed_.colwise().sum().transpose();
  loss_at_prep_ += prep_ * total;
  loss_total_ += total;
  add_pairwise(prep_, pairwise_consensus_);
  const Vector sq = prep_.rowwise().squaredNorm();
  const Eigen::RowVectorXd prep_sum = prep_.colwise().sum();
  const double n = static_cast<double>(prep_.rows());
  pairwise_sq_.array() += n * sq.array() - 2.0 * (prep_ * prep_sum.transpose()).array() + sq.sum();
  const double gap_dot = gap_.cwiseProduct(prep_).sum();
  cross_.array() += gap_dot - (prep_ * gap_.colwise().sum().transpose()).array();
  inner_->feed(fed_);
  return played_;
}

Vector BoostingReduction::inner_regret() const {
  return loss_at_prep_.array() - min_linear(*set_, loss_total_);
}

Vector BoostingReduction::lipschitz_bound() const {
  const double c = mode_ == rewards::Mode::Monotone ? 2.0 : 1.0;
  return inner_regret() + c * G_ * pairwise_consensus_;
}

Vector BoostingReduction::smooth_bound() const {
  const double c = mode_ == rewards::Mode::Monotone ? 0.5 : 0.125;
  return inner_regret() + c * beta_ * pairwise_sq_ + cross_;
}

Vector BoostingReduction::certified_bound() const {
  return bound_ == BoundKind::Smooth ? smooth_bound() : lipschitz_bound();
}

std::vector<Matrix> frank_wolfe_chain(const std::vector<Matrix>& directions) {
  if (directions.empty()) throw InputError("frank-wolfe chain needs at least one direction");
  const double inv_L = 1.0 / static_cast<double>(directions.size());
  std::vector<Matrix> chain;
  chain.reserve(directions.size() + 1);
  chain.push_back(Matrix::Zero(directions[0].rows(), directions[0].cols()));
  for (const auto& v : directions) {
    const Matrix& x = chain.back();
    chain.push_back(x + inv_L * v.cwiseProduct((1.0 - x.array()).matrix()));
  }
  return chain;
}

Dmfw::Dmfw(std::vector<std::unique_ptr<doco::DocoEngine>> inner, const sets::DecisionSet& set,
           std::vector<Rng> grad_rngs, Rng permutation_rng, double G, double beta)
    : inner_(std::move(inner)),
      set_(&set),
      L_(static_cast<long>(inner_.size())),
      rngs_(std::move(grad_rngs)),
      perm_rng_(permutation_rng),
      G_(G),
      beta_(beta) {
  if (inner_.empty()) throw ConfigError("meta-frank-wolfe needs at least one inner engine");
  if (!set.downward_closed())
    throw ConfigError("meta-frank-wolfe requires a downward-closed decision set containing 0");
  const auto n = inner_[0]->nodes();
  if (rngs_.size() != n) throw ConfigError("meta-frank-wolfe: one RNG stream per node");
  for (const auto& e : inner_) {
    if (e->nodes() != n || e->dim() != set.dim())
      throw ConfigError("meta-frank-wolfe: inner engines disagree on shape");
  }
  const auto rows = static_cast<Eigen::Index>(n);
  fed_ = Matrix::Zero(rows, set.dim());
  loss_at_v_.assign(static_cast<std::size_t>(L_), Vector::Zero(rows));
  loss_total_.assign(static_cast<std::size_t>(L_), Vector::Zero(set.dim()));
  direction_consensus_ = Vector::Zero(rows);
  assignment_.resize(static_cast<std::size_t>(L_));
}

std::string Dmfw::name() const { return "dmfw+" + inner_[0]->name(); }

double Dmfw::alpha() const { return std::exp(-1.0); }

void Dmfw::begin_block(long /*q*/) {
  directions_.clear();
  for (const auto& e : inner_) {
    directions_.push_back(e->decisions());
    add_pairwise(directions_.back(), direction_consensus_);
  }
  chain_ = frank_wolfe_chain(directions_);
  std::vector<long> perm(static_cast<std::size_t>(L_));
  std::iota(perm.begin(), perm.end(), 0L);
  std::shuffle(perm.begin(), perm.end(), perm_rng_);
  // perm[k] is the in-block position t_{q,k}; invert it.
  for (long k = 0; k < L_; ++k) assignment_[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = k;
}

const Matrix& Dmfw::step(const rewards::RewardSequence& seq, long t) {
  if (t != rounds_seen_)
    throw ConfigError("meta-frank-wolfe: rounds must be stepped in order");
  const long pos = t % L_;
  if (pos == 0) begin_block(t / L_ + 1);
  const long k = assignment_[static_cast<std::size_t>(pos)];
  const Matrix& xk = chain_[static_cast<std::size_t>(k)];
  for (Eigen::Index i = 0; i < xk.rows(); ++i) {
    const Vector point = xk.row(i).transpose();
    const Vector g = seq.stoch_grad(t, static_cast<std::size_t>(i), point, rngs_[static_cast<std::size_t>(i)]);
    fed_.row(i) = g.cwiseProduct((point.array() - 1.0).matrix()).transpose();
  }
  const auto ks = static_cast<std::size_t>(k);
  const Vector total = fed_.colwise().sum().transpose();
  loss_at_v_[ks] += directions_[ks] * total;
  loss_total_[ks] += total;
  inner_[ks]->feed(fed_);
  exchanges_last_ = inner_[ks]->exchanges_last_round();
  ++rounds_seen_;
  return chain_.back();
}

Vector Dmfw::weighted_inner_regret() const {
  Vector acc = Vector::Zero(direction_consensus_.size());
  for (long k = 0; k < L_; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const double w = std::pow(1.0 - 1.0 / static_cast<double>(L_), static_cast<double>(L_ - 1 - k));
    acc += w * (loss_at_v_[ks].array() - min_linear(*set_, loss_total_[ks])).matrix();
  }
  return acc;
}

Vector Dmfw::certified_bound() const {
  const double R = set_->radius();
  const double n = static_cast<double>(direction_consensus_.size());
  const double tail = n * beta_ * static_cast<double>(rounds_seen_) * R * R / (2.0 * static_cast<double>(L_));
  return (weighted_inner_regret() + 4.0 * (beta_ + G_) * R * direction_consensus_).array() + tail;
}

UnbiasednessReport permutation_unbiasedness_check(const rewards::RewardSequence& seq, long q,
                                                  const std::vector<Vector>& chain_points,
                                                  std::size_t node, int trials, Rng& rng,
                                                  double max_se) {
  const long L = static_cast<long>(chain_points.size());
  const long start = (q - 1) * L;
  if (L == 0 || start < 0 || start + L > seq.horizon())
    throw InputError("unbiasedness check: block outside the horizon");
  const int d = seq.dim();
  auto fed = [&](long t, long k) {
    const Vector& x = chain_points[static_cast<std::size_t>(k)];
    return Vector(seq.at(t, node).grad_unchecked(x).cwiseProduct((x.array() - 1.0).matrix()));
  };
  std::vector<Vector> target(static_cast<std::size_t>(L), Vector::Zero(d));
  for (long k = 0; k < L; ++k) {
    for (long p = 0; p < L; ++p) target[static_cast<std::size_t>(k)] += fed(start + p, k);
    target[static_cast<std::size_t>(k)] /= static_cast<double>(L);
  }
  std::vector<Vector> sum(static_cast<std::size_t>(L), Vector::Zero(d));
  std::vector<Vector> sumsq(static_cast<std::size_t>(L), Vector::Zero(d));
  std::vector<long> perm(static_cast<std::size_t>(L));
  for (int tr = 0; tr < trials; ++tr) {
    std::iota(perm.begin(), perm.end(), 0L);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (long k = 0; k < L; ++k) {
      const Vector s = fed(start + perm[static_cast<std::size_t>(k)], k);
      sum[static_cast<std::size_t>(k)] += s;
      sumsq[static_cast<std::size_t>(k)] += s.cwiseProduct(s);
    }
  }
  UnbiasednessReport r;
  const double N = static_cast<double>(trials);
  for (long k = 0; k < L; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Vector mean = sum[ks] / N;
    for (int j = 0; j < d; ++j) {
      const double var = std::max(0.0, sumsq[ks](j) / N - mean(j) * mean(j)) * N / std::max(1.0, N - 1.0);
      const double se = std::sqrt(var / N);
      const double gap = std::abs(mean(j) - target[ks](j));
      const double scale = 1e-12 * std::max(1.0, std::abs(target[ks](j)));
      if (se <= scale) {
        if (gap > scale) {
          r.ok = false;
          r.worst_z = std::numeric_limits<double>::infinity();
        }
      } else {
        r.worst_z = std::max(r.worst_z, gap / se);
        if (gap > max_se * se) r.ok = false;
      }
    }
  }
  std::ostringstream os;
  os << "worst standardized gap " << r.worst_z << " over " << L << " engines";
  r.detail = os.str();
  return r;
}

}  // namespace dosm::reductions
