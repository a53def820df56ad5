#include "dosm/doco.hpp"

#include <algorithm>
#include <cmath>

namespace dosm::doco {

namespace {

Matrix broadcast(const Vector& row, std::size_t n) {
  return Matrix(row.transpose().replicate(static_cast<Eigen::Index>(n), 1));
}

double max_row_deviation(const Matrix& m, const Eigen::RowVectorXd& center) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) worst = std::max(worst, (m.row(i) - center).norm());
  return worst;
}

long ceil_log_over_rho(double arg, double rho) {
  return static_cast<long>(std::ceil(std::log(std::max(arg, 1.0)) / rho));
}

}  // namespace

Vector ball_sample(Rng& rng, int d) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector v(d);
  double norm = 0.0;
  do {
    for (int j = 0; j < d; ++j) v(j) = gauss(rng);
    norm = v.norm();
  } while (norm == 0.0);
  return v * (std::pow(u(rng), 1.0 / d) / norm);
}

long pad_horizon(long T, long block) { return ((T + block - 1) / block) * block; }

EngineParams default_params(const network::SpectralProfile& profile, double G, int d, long T,
                            Role role) {
  EngineParams p;
  p.theta = profile.theta;
  switch (role) {
    case Role::SmoothDoco:
      p.L = std::max(static_cast<long>(std::ceil(std::cbrt(static_cast<double>(T)))),
                     static_cast<long>(profile.C));
      p.K = profile.C;
      break;
    case Role::LinearDoco:
      p.L = profile.C;
      p.K = profile.C;
      break;
    case Role::Dftpl:
    case Role::DmfwInner:
      p.L = std::max(2L, 2 * ceil_log_over_rho(std::sqrt(static_cast<double>(profile.n)) *
                                                   static_cast<double>(T),
                                               profile.rho));
      p.K = static_cast<int>(p.L / 2);
      break;
  }
  p.eta = G * std::sqrt(static_cast<double>(d) * static_cast<double>(T) * static_cast<double>(p.L));
  return p;
}

DmfwParams dmfw_params(const network::SpectralProfile& profile, double G, int d, long T) {
  auto inner_block = [&](long L) { return std::max(2L, static_cast<long>(profile.c_prime(T, L))); };
  long L = 1;
  for (int it = 0; it < 8; ++it) {
    const double target = std::cbrt(static_cast<double>(T) / static_cast<double>(inner_block(L)));
    L = std::max(1L, std::lround(target));
  }
  DmfwParams out;
  out.L = L;
  out.inner_L = inner_block(L);
  out.padded_T = pad_horizon(T, out.L * out.inner_L);
  if (out.padded_T != T) {
    for (long cand = std::max(1L, L / 2); cand <= 2 * L; ++cand) {
      const long c = inner_block(cand);
      if (T % (cand * c) == 0) {
        out.L = cand;
        out.inner_L = c;
        out.padded_T = T;
        break;
      }
    }
  }
  const double inner_T = static_cast<double>(out.padded_T / out.L);
  out.inner_eta = G * std::sqrt(static_cast<double>(d) * inner_T * static_cast<double>(out.inner_L));
  return out;
}

DocoEngine::DocoEngine(const EngineContext& ctx)
    : mixing_(ctx.mixing), set_(ctx.set), horizon_(ctx.horizon), rngs_(ctx.node_rngs) {
  if (!mixing_ || !set_) throw ConfigError("engine context needs a mixing matrix and a set");
  n_ = mixing_->size();
  d_ = set_->dim();
  if (horizon_ <= 0) throw ConfigError("engine horizon must be positive");
  if (rngs_.size() != n_) throw ConfigError("engine needs one RNG stream per node");
  initial_ = ctx.initial.size() ? ctx.initial : set_->lmo(Vector::Zero(d_));
  if (initial_.size() != d_ || !set_->contains(initial_))
    throw ConfigError("initial decision is not in the decision set");
}

void DocoEngine::feed(const Matrix& grads) {
  if (round_ >= horizon_) throw ConfigError(name() + ": horizon exhausted");
  if (grads.rows() != static_cast<Eigen::Index>(n_) || grads.cols() != d_)
    throw InputError(name() + ": gradient matrix has wrong shape");
  exchanges_now_ = 0;
  do_feed(grads);
  ++round_;
  exchanges_last_ = exchanges_now_;
  exchanges_total_ += exchanges_now_;
}

AdOspa::AdOspa(EngineContext ctx, EngineParams params) : DocoEngine(ctx), params_(params) {
  if (params_.L <= 0 || params_.K <= 0) throw ConfigError("ad_ospa: L and K must be positive");
  if (params_.K > params_.L) throw ConfigError("ad_ospa: K must not exceed L");
  if (horizon_ % params_.L != 0)
    throw ConfigError("ad_ospa: horizon " + std::to_string(horizon_) +
                      " is not a multiple of L=" + std::to_string(params_.L));
  const auto n = static_cast<Eigen::Index>(n_);
  x_ = broadcast(initial_, n_);
  z_ = Matrix::Zero(n, d_);
  z_prev_ = z_;
  zk_ = z_;
  zkm1_ = z_;
  g_ = z_;
  mean_g_sum_ = Vector::Zero(d_);
}

void AdOspa::do_feed(const Matrix& grads) {
  const long q = round_ / params_.L + 1;
  const long k = round_ % params_.L;
  g_ += grads;
  if (q >= 2 && k < params_.K) {
    Matrix next = network::chebyshev_gossip_step(mixing(), params_.theta, zk_, zkm1_);
    zkm1_ = std::move(zk_);
    zk_ = std::move(next);
    count_exchange();
  }
  if (k == params_.L - 1) end_block(q);
}

void AdOspa::end_block(long q) {
  // After K recursion steps zk_ = z_{q,K} and zkm1_ = z_{q,K-1}; in block 1
  // both stay at their zero initialization.
  z_prev_ = z_;
  if (q >= 2) {
    z_ = zk_;
    const Eigen::RowVectorXd mean = z_.colwise().mean();
    z_consensus_.push_back(max_row_deviation(z_, mean));
    z_mean_drift_.push_back((mean.transpose() - mean_g_sum_).norm());
  }
  zk_ = z_ + g_;
  zkm1_ += g_;
  mean_g_sum_ += g_.colwise().mean().transpose();
  g_.setZero();

  if (q >= 2) {
    const double inv_L = 1.0 / static_cast<double>(params_.L);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const Vector base = -z_prev_.row(row).transpose();
      Vector acc = Vector::Zero(d_);
      for (long m = 0; m < params_.L; ++m)
        acc += set().lmo(base + params_.eta * ball_sample(rngs_[i], d_));
      x_.row(row) = (acc * inv_L).transpose();
    }
  }
}

Dftpl::Dftpl(EngineContext ctx, EngineParams params) : DocoEngine(ctx), params_(params) {
  if (params_.L <= 0 || params_.L % 2 != 0) throw ConfigError("d_ftpl: L must be positive and even");
  if (horizon_ % params_.L != 0)
    throw ConfigError("d_ftpl: horizon " + std::to_string(horizon_) +
                      " is not a multiple of L=" + std::to_string(params_.L));
  const auto n = static_cast<Eigen::Index>(n_);
  x_ = broadcast(initial_, n_);
  xbuf_ = x_;
  gbuf_ = Matrix::Zero(n, d_);
  gbuf_mean_ = Eigen::RowVectorXd::Zero(d_);
  g_raw_ = gbuf_;
  g_hist_ = gbuf_;
}

void Dftpl::begin_block(long /*q*/) {
  for (std::size_t i = 0; i < n_; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const Vector c = -g_hist_.row(row).transpose() + params_.eta * ball_sample(rngs_[i], d_);
    xbuf_.row(row) = set().lmo(c).transpose();
  }
  xhat_mean_rows_ = xbuf_.colwise().mean();
}

void Dftpl::do_feed(const Matrix& grads) {
  const long q = round_ / params_.L + 1;
  const long kx = round_ % params_.L + 1;
  const long half = params_.L / 2;
  if (kx == 1) begin_block(q);
  g_raw_ += grads;
  if (kx <= half) {
    xbuf_ = network::gossip_step(mixing(), xbuf_);
    count_exchange();
  }
  if (kx - half >= 1 && q >= 2) {
    gbuf_ = network::gossip_step(mixing(), gbuf_);
    count_exchange();
  }
  if (kx == params_.L) end_block(q);
}

void Dftpl::end_block(long q) {
  if (q >= 2) {
    g_consensus_.push_back(max_row_deviation(gbuf_, gbuf_mean_));
    g_hist_ += gbuf_;
  }
  x_consensus_.push_back(max_row_deviation(xbuf_, xhat_mean_rows_.row(0)));
  x_ = xbuf_;
  gbuf_ = g_raw_;
  gbuf_mean_ = g_raw_.colwise().mean();
  g_raw_.setZero();
}

Dogd::Dogd(EngineContext ctx, double G) : DocoEngine(ctx), G_(G) {
  if (!(G_ > 0.0)) throw ConfigError("d_ogd: gradient bound G must be positive");
  x_ = broadcast(initial_, n_);
}

void Dogd::do_feed(const Matrix& grads) {
  const double t = static_cast<double>(round_ + 1);
  const double step = set().radius() / (G_ * std::sqrt(t));
  Matrix y = network::gossip_step(mixing(), x_);
  count_exchange();
  y.noalias() -= step * grads;
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    x_.row(i) = set().project(y.row(i).transpose()).transpose();
}

std::string to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::AdOspa: return "ad_ospa";
    case EngineKind::Dftpl: return "d_ftpl";
    case EngineKind::Dogd: return "d_ogd";
  }
  return "unknown";
}

EngineKind engine_kind_from_string(const std::string& s) {
  if (s == "ad_ospa") return EngineKind::AdOspa;
  if (s == "d_ftpl") return EngineKind::Dftpl;
  if (s == "d_ogd") return EngineKind::Dogd;
  throw InputError("unknown engine \"" + s + "\" (expected ad_ospa, d_ftpl or d_ogd)");
}

std::unique_ptr<DocoEngine> make_engine(EngineKind kind, EngineContext ctx,
                                        const EngineParams& params, double G) {
  switch (kind) {
    case EngineKind::AdOspa: return std::make_unique<AdOspa>(std::move(ctx), params);
    case EngineKind::Dftpl: return std::make_unique<Dftpl>(std::move(ctx), params);
    case EngineKind::Dogd: return std::make_unique<Dogd>(std::move(ctx), G);
  }
  throw ConfigError("unknown engine kind");
}

}  // namespace dosm::doco
