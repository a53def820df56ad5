#include <doctest.h>

#include "dosm/sets.hpp"

using namespace dosm;
using namespace dosm::sets;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double a : v) x(k++) = a;
  return x;
}

std::vector<DecisionSet> sample_sets() {
  return {DecisionSet::unit_box(3), DecisionSet::box(vec({0.2, 0.1, 0.0}), vec({0.9, 1.0, 0.5})),
          DecisionSet::capped_simplex(3, 1.0), DecisionSet::capped_simplex(4, 2.5),
          DecisionSet::knapsack(vec({2.0, 1.0, 0.5}), 1.2)};
}

// Brute-force maximizer of <c, x> over the grid points of K.
double grid_lp(const DecisionSet& set, const Vector& c, double res) {
  const int steps = static_cast<int>(std::round(1.0 / res));
  double best = -1e300;
  Vector x(3);
  for (int a = 0; a <= steps; ++a)
    for (int b = 0; b <= steps; ++b)
      for (int e = 0; e <= steps; ++e) {
        x << a * res, b * res, e * res;
        if (set.contains(x, 1e-12)) best = std::max(best, c.dot(x));
      }
  return best;
}

}  // namespace

TEST_CASE("membership") {
  CHECK(DecisionSet::unit_box(2).contains(vec({0.5, 0.5})));
  CHECK_FALSE(DecisionSet::capped_simplex(3, 1.0).contains(vec({0.6, 0.6, 0.0})));
  CHECK(DecisionSet::knapsack(vec({2.0, 1.0}), 1.0).contains(vec({0.5, 0.0})));
  CHECK_FALSE(DecisionSet::unit_box(2).contains(vec({1.1, 0.0})));
}

TEST_CASE("linear maximization oracle") {
  CHECK((DecisionSet::capped_simplex(3, 1.0).lmo(vec({3, 1, 2})) - vec({1, 0, 0})).norm() < 1e-15);
  const auto s = DecisionSet::capped_simplex(3, 1.5);
  const Vector x = s.lmo(vec({3, 1, 2}));
  CHECK((x - vec({1, 0, 0.5})).norm() < 1e-15);
  CHECK(vec({3, 1, 2}).dot(x) >= grid_lp(s, vec({3, 1, 2}), 0.01) - 1e-12);
  CHECK(DecisionSet::knapsack(vec({2, 1, 0.5}), 1.2).lmo(Vector::Zero(3)).norm() == 0.0);

  Rng rng = make_stream(11, "test");
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& set : sample_sets()) {
    if (set.dim() != 3) continue;
    for (int k = 0; k < 5; ++k) {
      const Vector c = vec({u(rng), u(rng), u(rng)});
      const Vector x = set.lmo(c);
      CHECK(set.contains(x, 1e-12));
      CHECK(c.dot(x) >= grid_lp(set, c, 0.05) - 1e-12);
    }
  }
}

TEST_CASE("projection") {
  CHECK((DecisionSet::unit_box(2).project(vec({2, -1})) - vec({1, 0})).norm() < 1e-15);
  CHECK((DecisionSet::capped_simplex(2, 1.0).project(vec({1, 1})) - vec({0.5, 0.5})).norm() < 1e-9);

  Rng rng = make_stream(12, "test");
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  for (const auto& set : sample_sets()) {
    for (int k = 0; k < 20; ++k) {
      Vector y(set.dim());
      for (int j = 0; j < set.dim(); ++j) y(j) = u(rng);
      const Vector p = set.project(y);
      REQUIRE(set.contains(p, 1e-9));
      CHECK((set.project(p) - p).norm() < 1e-8);
      // Variational inequality: <y - p, x - p> <= 0 for feasible x.
      for (int m = 0; m < 10; ++m) {
        Vector c(set.dim());
        for (int j = 0; j < set.dim(); ++j) c(j) = u(rng);
        const Vector x = set.lmo(c);
        CHECK((y - p).dot(x - p) <= 1e-8);
      }
    }
  }
}

TEST_CASE("inf-norm minimizer") {
  CHECK(DecisionSet::capped_simplex(3, 1.0).nu() == 0.0);
  CHECK(DecisionSet::unit_box(4).inf_minimizer().norm() == 0.0);
  const auto b = DecisionSet::box(vec({0.2, 0.1}), vec({1, 1}));
  CHECK((b.inf_minimizer() - vec({0.2, 0.1})).norm() < 1e-15);
  CHECK(b.nu() == doctest::Approx(0.2));
  CHECK_FALSE(b.downward_closed());
  CHECK(DecisionSet::knapsack(vec({1, 1}), 1).downward_closed());
}

TEST_CASE("radius bounds every feasible point") {
  Rng rng = make_stream(13, "test");
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& set : sample_sets())
    for (int k = 0; k < 50; ++k) {
      Vector c(set.dim());
      for (int j = 0; j < set.dim(); ++j) c(j) = u(rng);
      CHECK(set.lmo(c).norm() <= set.radius() + 1e-12);
    }
}

TEST_CASE("invalid descriptors") {
  CHECK_THROWS(DecisionSet::capped_simplex(3, -1.0));
  CHECK_THROWS(DecisionSet::knapsack(vec({1.0, -2.0}), 1.0));
  CHECK_THROWS(DecisionSet::box(vec({0.5}), vec({0.2})));
}
