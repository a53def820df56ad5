#include "dosm/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

namespace dosm::rewards {

namespace {

constexpr int kMaxVertexDim = 16;

template <class Fn>
void for_each_vertex(int d, Fn&& fn) {
  const unsigned long count = 1UL << d;
  Vector v(d);
  for (unsigned long mask = 0; mask < count; ++mask) {
    for (int j = 0; j < d; ++j) v(j) = (mask >> j & 1UL) ? 1.0 : 0.0;
    fn(v);
  }
}

Vector uniform_cube(Rng& rng, int d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(d);
  for (int j = 0; j < d; ++j) x(j) = u(rng);
  return x;
}

using Gauss200 = boost::math::quadrature::gauss<double, 200>;

}  // namespace

Vector Quadratic::grad(const Vector& x) const {
  if (x.size() != h.size()) throw InputError("grad: dimension mismatch");
  if (!in_unit_cube(x)) throw InputError("grad: query point outside [0,1]^d");
  return H * x + h;
}

double Quadratic::smoothness() const {
  if (H.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double Quadratic::gradient_bound() const {
  const int d = dim();
  if (d > kMaxVertexDim) {
    return h.norm() + H.cwiseAbs().rowwise().sum().norm();
  }
  double best = 0.0;
  for_each_vertex(d, [&](const Vector& v) { best = std::max(best, (H * v + h).norm()); });
  return best;
}

Quadratic& Quadratic::operator+=(const Quadratic& other) {
  H += other.H;
  h += other.h;
  c0 += other.c0;
  return *this;
}

Quadratic Quadratic::zero(int d) { return {Matrix::Zero(d, d), Vector::Zero(d), 0.0}; }

bool in_unit_cube(const Vector& x, double tol) {
  return (x.array() >= -tol).all() && (x.array() <= 1.0 + tol).all();
}

std::string to_string(Mode mode) {
  return mode == Mode::Monotone ? "monotone" : "non_monotone";
}

Vector sample_noise(Rng& rng, int d, double noise) {
  if (noise <= 0.0) return Vector::Zero(d);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector dir(d);
  double norm = 0.0;
  do {
    for (int j = 0; j < d; ++j) dir(j) = gauss(rng);
    norm = dir.norm();
  } while (norm == 0.0);
  return dir * (noise * u(rng) / norm);
}

RewardSequence::RewardSequence(long horizon, std::size_t nodes, std::vector<Quadratic> fns,
                               double noise, bool monotone)
    : horizon_(horizon), nodes_(nodes), fns_(std::move(fns)), noise_(noise), monotone_(monotone) {
  if (horizon <= 0 || nodes == 0) throw InputError("reward sequence: empty horizon or node set");
  if (fns_.size() != static_cast<std::size_t>(horizon) * nodes)
    throw InputError("reward sequence: expected T*n functions");
  if (noise < 0.0) throw InputError("reward sequence: negative noise");
  dim_ = fns_.front().dim();
  total_ = Quadratic::zero(dim_);
  round_totals_.reserve(static_cast<std::size_t>(horizon));
  double sup_grad = 0.0;
  for (long t = 0; t < horizon; ++t) {
    Quadratic sum = Quadratic::zero(dim_);
    for (std::size_t i = 0; i < nodes; ++i) {
      const auto& f = at(t, i);
      if (f.dim() != dim_ || f.H.rows() != dim_ || f.H.cols() != dim_)
        throw InputError("reward sequence: inconsistent dimensions");
      sum += f;
      sup_grad = std::max(sup_grad, f.gradient_bound());
      beta_ = std::max(beta_, f.smoothness());
    }
    total_ += sum;
    round_totals_.push_back(std::move(sum));
  }
  G_ = sup_grad + noise_;
}

Vector RewardSequence::stoch_grad(long t, std::size_t i, const Vector& x, Rng& rng) const {
  Vector g = at(t, i).grad(x);
  if (noise_ > 0.0) g += sample_noise(rng, dim_, noise_);
  return g;
}

Quadratic make_quadratic(const FamilyParams& p, Rng& rng) {
  if (p.d <= 0) throw InputError("family: dimension must be positive");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution keep(std::clamp(p.density, 0.0, 1.0));
  Quadratic f = Quadratic::zero(p.d);
  for (int j = 0; j < p.d; ++j) {
    f.H(j, j) = -p.scale * u(rng);
    for (int k = j + 1; k < p.d; ++k) {
      const double v = keep(rng) ? -p.scale * u(rng) : 0.0;
      f.H(j, k) = v;
      f.H(k, j) = v;
    }
  }
  if (p.mode == Mode::Monotone) {
    const Vector row_mass = -(f.H * Vector::Ones(p.d));
    for (int j = 0; j < p.d; ++j) f.h(j) = row_mass(j) + p.scale * u(rng);
    f.c0 = 0.0;
  } else {
    for (int j = 0; j < p.d; ++j) f.h(j) = p.scale * (2.0 * u(rng) - 1.0);
    f.c0 = f.h.cwiseAbs().sum() + f.H.cwiseAbs().sum();
  }
  return f;
}

RewardSequence make_sequence(std::uint64_t seed, long horizon, std::size_t nodes,
                             const FamilyParams& params) {
  Rng rng = make_stream(seed, "rewards");
  std::vector<Quadratic> fns;
  fns.reserve(static_cast<std::size_t>(horizon) * nodes);
  for (long t = 0; t < horizon; ++t)
    for (std::size_t i = 0; i < nodes; ++i) fns.push_back(make_quadratic(params, rng));
  return RewardSequence(horizon, nodes, std::move(fns), params.noise,
                        params.mode == Mode::Monotone);
}

double z_cdf(double c) { return (std::pow(1.0 - c / 2.0, -2.0) - 1.0) / 3.0; }

double z_inverse_cdf(double p) { return 2.0 * (1.0 - 1.0 / std::sqrt(3.0 * p + 1.0)); }

double zprime_cdf(double c) {
  return (std::exp(c - 1.0) - std::exp(-1.0)) / (1.0 - std::exp(-1.0));
}

double zprime_inverse_cdf(double p) {
  return 1.0 + std::log(p * (1.0 - std::exp(-1.0)) + std::exp(-1.0));
}

double sample_Z(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::clamp(z_inverse_cdf(u(rng)), 0.0, 1.0);
}

double sample_Zprime(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::clamp(zprime_inverse_cdf(u(rng)), 0.0, 1.0);
}

double monotone_scale() { return 1.0 - std::exp(-1.0); }

BoostSample boost_query_nonmonotone(const Vector& xhat, const Vector& xinf, double z) {
  return {z, (0.5 * z) * (xhat - xinf) + xinf, kNonMonotoneScale};
}

BoostSample boost_query_monotone(const Vector& xhat, double z) {
  return {z, z * xhat, monotone_scale()};
}

Vector boosted_grad_nonmonotone(const RewardSequence& seq, long t, std::size_t i,
                                const Vector& xhat, const Vector& xinf, double z, Rng& rng) {
  const auto s = boost_query_nonmonotone(xhat, xinf, z);
  return s.scale * seq.stoch_grad(t, i, s.query.cwiseMax(0.0).cwiseMin(1.0), rng);
}

Vector boosted_grad_monotone(const RewardSequence& seq, long t, std::size_t i, const Vector& xhat,
                             double z, Rng& rng) {
  const auto s = boost_query_monotone(xhat, z);
  return s.scale * seq.stoch_grad(t, i, s.query.cwiseMax(0.0).cwiseMin(1.0), rng);
}

Vector grad_F_numeric(const Quadratic& f, const Vector& x, const Vector& xinf, Mode mode) {
  const auto& nodes = Gauss200::abscissa();
  const auto& weights = Gauss200::weights();
  Vector acc = Vector::Zero(f.dim());
  // Map [-1,1] to [0,1]: z = (s+1)/2, dz = ds/2. Nodes are stored for s >= 0.
  auto add = [&](double s, double w) {
    const double z = 0.5 * (s + 1.0);
    if (mode == Mode::NonMonotone) {
      const double weight = 1.0 / (8.0 * std::pow(1.0 - z / 2.0, 3));
      acc += (0.5 * w * weight) * f.grad_unchecked((0.5 * z) * (x - xinf) + xinf);
    } else {
      acc += (0.5 * w * std::exp(z - 1.0)) * f.grad_unchecked(z * x);
    }
  };
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    add(nodes[k], weights[k]);
    if (nodes[k] != 0.0) add(-nodes[k], weights[k]);
  }
  return acc;
}

CheckResult check_dr_submodular(const Quadratic& f, int trials, Rng& rng, double tol) {
  const int d = f.dim();
  CheckResult r;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> coord(0, d - 1);
  auto probe = [&](const Vector& x, const Vector& y, int j, double z) {
    Vector xs = x, ys = y;
    xs(j) += z;
    ys(j) += z;
    const double gain_x = f.value(xs) - f.value(x);
    const double gain_y = f.value(ys) - f.value(y);
    const double violation = gain_y - gain_x;
    if (violation > r.worst) {
      r.worst = violation;
      r.witness_x = x;
      r.witness_y = y;
      r.coordinate = j;
      r.step = z;
    }
  };
  for (int j = 0; j < d; ++j) {
    Vector y = Vector::Ones(d);
    y(j) = 0.0;
    probe(Vector::Zero(d), y, j, 1.0);
    probe(Vector::Zero(d), 0.5 * Vector::Unit(d, j), j, 0.5);
  }
  for (int k = 0; k < trials; ++k) {
    Vector x = uniform_cube(rng, d);
    Vector y = x;
    for (int m = 0; m < d; ++m) y(m) += u(rng) * (1.0 - x(m));
    const int j = coord(rng);
    const double z = u(rng) * (1.0 - y(j));
    probe(x, y, j, z);
  }
  r.ok = r.worst <= tol;
  if (!r.ok) {
    std::ostringstream os;
    os << "diminishing returns violated by " << r.worst << " along coordinate " << r.coordinate
       << " with step " << r.step;
    r.detail = os.str();
  }
  return r;
}

CheckResult check_nonnegative(const Quadratic& f, int trials, Rng& rng, double tol) {
  const int d = f.dim();
  CheckResult r;
  auto probe = [&](const Vector& x) {
    const double v = -f.value(x);
    if (v > r.worst) {
      r.worst = v;
      r.witness_x = x;
    }
  };
  if (d <= kMaxVertexDim) for_each_vertex(d, probe);
  for (int k = 0; k < trials; ++k) probe(uniform_cube(rng, d));
  r.ok = r.worst <= tol;
  if (!r.ok) r.detail = "negative value " + std::to_string(-r.worst);
  return r;
}

CheckResult check_monotone(const Quadratic& f, int trials, Rng& rng, double tol) {
  const int d = f.dim();
  CheckResult r;
  auto probe = [&](const Vector& x) {
    const Vector g = f.grad_unchecked(x);
    Eigen::Index j = 0;
    const double v = -g.minCoeff(&j);
    if (v > r.worst) {
      r.worst = v;
      r.witness_x = x;
      r.coordinate = static_cast<int>(j);
    }
  };
  if (d <= kMaxVertexDim) for_each_vertex(d, probe);
  for (int k = 0; k < trials; ++k) probe(uniform_cube(rng, d));
  r.ok = r.worst <= tol;
  if (!r.ok) r.detail = "negative partial derivative " + std::to_string(-r.worst);
  return r;
}

CheckResult check_smooth(const Quadratic& f, double beta, int trials, Rng& rng, double tol) {
  const int d = f.dim();
  CheckResult r;
  for (int k = 0; k < trials; ++k) {
    Vector x = uniform_cube(rng, d), y = uniform_cube(rng, d);
    const double v =
        (f.grad_unchecked(x) - f.grad_unchecked(y)).norm() - beta * (x - y).norm();
    if (v > r.worst) {
      r.worst = v;
      r.witness_x = x;
      r.witness_y = y;
    }
  }
  r.ok = r.worst <= tol;
  if (!r.ok) r.detail = "gradient Lipschitz bound exceeded by " + std::to_string(r.worst);
  return r;
}

}  // namespace dosm::rewards
