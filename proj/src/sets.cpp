#include "dosm/sets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dosm::sets {

namespace {

constexpr int kMaxVertexEnumerationDim = 20;

std::vector<int> order_by_ratio_desc(const Vector& c, const Vector& w) {
  std::vector<int> idx(static_cast<std::size_t>(c.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return c(a) / w(a) > c(b) / w(b); });
  return idx;
}

// Largest squared norm over the vertices of {x in [0,1]^d : <w,x> <= b}. Every
// vertex has at most one fractional coordinate.
double budget_polytope_radius_sq(const Vector& w, double b) {
  const int d = static_cast<int>(w.size());
  if (d > kMaxVertexEnumerationDim) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += std::pow(std::min(1.0, b / w(j)), 2);
    return s;
  }
  double best = 0.0;
  const unsigned long count = 1UL << d;
  for (unsigned long mask = 0; mask < count; ++mask) {
    double used = 0.0, sq = 0.0;
    for (int j = 0; j < d; ++j)
      if (mask >> j & 1UL) {
        used += w(j);
        sq += 1.0;
      }
    if (used > b + 1e-12) continue;
    best = std::max(best, sq);
    for (int j = 0; j < d; ++j) {
      if (mask >> j & 1UL) continue;
      const double frac = std::min(1.0, (b - used) / w(j));
      best = std::max(best, sq + frac * frac);
    }
  }
  return best;
}

}  // namespace

std::string to_string(SetKind kind) {
  switch (kind) {
    case SetKind::Box: return "box";
    case SetKind::CappedSimplex: return "capped_simplex";
    case SetKind::Knapsack: return "knapsack";
  }
  return "unknown";
}

DecisionSet DecisionSet::box(Vector lower, Vector upper) {
  if (lower.size() == 0 || lower.size() != upper.size())
    throw InputError("box: lower and upper must be non-empty and of equal length");
  for (Eigen::Index j = 0; j < lower.size(); ++j) {
    if (!(0.0 <= lower(j) && lower(j) <= upper(j) && upper(j) <= 1.0))
      throw InputError("box: need 0 <= lower <= upper <= 1 in every coordinate");
  }
  DecisionSet s;
  s.kind_ = SetKind::Box;
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  s.finalize();
  return s;
}

DecisionSet DecisionSet::unit_box(int d) { return box(Vector::Zero(d), Vector::Ones(d)); }

DecisionSet DecisionSet::capped_simplex(int d, double budget) {
  if (d <= 0) throw InputError("capped simplex: dimension must be positive");
  if (!(budget > 0.0)) throw InputError("capped simplex: budget must be positive");
  DecisionSet s;
  s.kind_ = SetKind::CappedSimplex;
  s.lower_ = Vector::Zero(d);
  s.upper_ = Vector::Ones(d);
  s.weights_ = Vector::Ones(d);
  s.budget_ = budget;
  s.finalize();
  return s;
}

DecisionSet DecisionSet::knapsack(Vector weights, double budget) {
  if (weights.size() == 0) throw InputError("knapsack: empty weight vector");
  if ((weights.array() <= 0.0).any()) throw InputError("knapsack: weights must be positive");
  if (!(budget > 0.0)) throw InputError("knapsack: budget must be positive");
  DecisionSet s;
  s.kind_ = SetKind::Knapsack;
  s.lower_ = Vector::Zero(weights.size());
  s.upper_ = Vector::Ones(weights.size());
  s.weights_ = std::move(weights);
  s.budget_ = budget;
  s.finalize();
  return s;
}

void DecisionSet::finalize() {
  if (kind_ == SetKind::Box) {
    radius_ = upper_.norm();
    x_inf_ = lower_;
    nu_ = lower_.maxCoeff();
    downward_closed_ = lower_.isZero(0.0);
  } else {
    radius_ = std::sqrt(budget_polytope_radius_sq(weights_, budget_));
    x_inf_ = Vector::Zero(dim());
    nu_ = 0.0;
    downward_closed_ = true;
  }
}

bool DecisionSet::contains(const Vector& x, double tol) const {
  if (x.size() != lower_.size()) return false;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!(x(j) >= lower_(j) - tol && x(j) <= upper_(j) + tol)) return false;
  }
  if (kind_ != SetKind::Box && weights_.dot(x) > budget_ + tol) return false;
  return true;
}

Vector DecisionSet::lmo(const Vector& c) const {
  if (c.size() != lower_.size()) throw InputError("lmo: dimension mismatch");
  Vector x = lower_;
  if (kind_ == SetKind::Box) {
    for (Eigen::Index j = 0; j < c.size(); ++j)
      if (c(j) > 0.0) x(j) = upper_(j);
    return x;
  }
  double remaining = budget_;
  for (int j : order_by_ratio_desc(c, weights_)) {
    if (c(j) <= 0.0 || remaining <= 0.0) break;
    const double take = std::min(1.0, remaining / weights_(j));
    x(j) = take;
    remaining -= take * weights_(j);
  }
  return x;
}

Vector DecisionSet::project(const Vector& y) const {
  if (y.size() != lower_.size()) throw InputError("project: dimension mismatch");
  Vector x = y.cwiseMax(lower_).cwiseMin(upper_);
  if (kind_ == SetKind::Box || weights_.dot(x) <= budget_) return x;

  // x(lambda) = clamp(y - lambda * w, 0, 1); <w, x(lambda)> is nonincreasing in lambda.
  auto at = [&](double lambda) {
    return (y - lambda * weights_).cwiseMax(0.0).cwiseMin(1.0).eval();
  };
  double lo = 0.0;
  double hi = (y.array() / weights_.array()).maxCoeff();
  hi = std::max(hi, 0.0) + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (weights_.dot(at(mid)) > budget_)
      lo = mid;
    else
      hi = mid;
  }
  return at(hi);
}

std::string DecisionSet::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(d=" << dim();
  if (kind_ != SetKind::Box) os << ", b=" << budget_;
  os << ", R=" << radius_ << ", nu=" << nu_ << ")";
  return os.str();
}

InfNormMinimizer inf_norm_minimizer(const DecisionSet& set) {
  return {set.inf_minimizer(), set.nu()};
}

}  // namespace dosm::sets
