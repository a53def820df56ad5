#pragma once

#include <string>

#include "dosm/common.hpp"

namespace dosm::sets {

enum class SetKind { Box, CappedSimplex, Knapsack };

std::string to_string(SetKind kind);

/// Convex feasible region inside [0,1]^d.
///
/// Three families are supported, each with an exact linear maximization
/// oracle: boxes [lower, upper], the capped simplex {x in [0,1]^d : sum x <= b}
/// and the single-row knapsack {x in [0,1]^d : <a, x> <= b} with a > 0.
/// The geometric constants consumed by the algorithms (radius R, the
/// inf-norm minimizer and its norm nu) are computed in closed form at
/// construction.
class DecisionSet {
 public:
  static DecisionSet box(Vector lower, Vector upper);
  static DecisionSet unit_box(int d);
  static DecisionSet capped_simplex(int d, double budget);
  static DecisionSet knapsack(Vector weights, double budget);

  SetKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  /// Budget-row coefficients (all ones for the capped simplex, empty for boxes).
  const Vector& weights() const { return weights_; }
  double budget() const { return budget_; }

  /// max_{x in K} ||x||_2, attained at a vertex.
  double radius() const { return radius_; }
  /// argmin_{x in K} ||x||_inf.
  const Vector& inf_minimizer() const { return x_inf_; }
  double nu() const { return nu_; }
  bool downward_closed() const { return downward_closed_; }
  /// Lower bound u of a downward-closed set (always the origin here).
  Vector lower_bound() const { return Vector::Zero(dim()); }

  bool contains(const Vector& x, double tol = 1e-9) const;

  /// Exact argmax_{x in K} <c, x>. Coordinates with c_j <= 0 stay at their
  /// smallest feasible value, so lmo(0) is the lower corner.
  Vector lmo(const Vector& c) const;

  /// Euclidean projection. Budgeted sets clamp to the box and bisect on the
  /// budget multiplier; the returned point always satisfies contains().
  Vector project(const Vector& y) const;

  std::string describe() const;

 private:
  DecisionSet() = default;
  void finalize();

  SetKind kind_ = SetKind::Box;
  Vector lower_;
  Vector upper_;
  Vector weights_;
  double budget_ = 0.0;
  double radius_ = 0.0;
  Vector x_inf_;
  double nu_ = 0.0;
  bool downward_closed_ = false;
};

struct InfNormMinimizer {
  Vector point;
  double nu = 0.0;
};

InfNormMinimizer inf_norm_minimizer(const DecisionSet& set);

}  // namespace dosm::sets
