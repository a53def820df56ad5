#include <doctest.h>

#include "dosm/reductions.hpp"

using namespace dosm;
using namespace dosm::reductions;

namespace {

struct Setup {
  network::MixingMatrix mixing;
  sets::DecisionSet set;
  rewards::RewardSequence seq;
  Setup(std::size_t n, sets::DecisionSet s, rewards::Mode mode, long T, double noise = 0.1)
      : mixing(network::build_lazy_metropolis(network::Topology::ring(n))),
        set(std::move(s)),
        seq(rewards::make_sequence(3, T, n, params(set.dim(), mode, noise))) {}

  static rewards::FamilyParams params(int d, rewards::Mode mode, double noise) {
    rewards::FamilyParams p;
    p.d = d;
    p.mode = mode;
    p.noise = noise;
    return p;
  }

  BoostingReduction boosting(doco::EngineKind kind, rewards::Mode mode) const {
    doco::EngineContext ctx;
    ctx.mixing = &mixing;
    ctx.set = &set;
    ctx.horizon = seq.horizon();
    ctx.node_rngs = make_node_streams(1, "engine.node", mixing.size());
    const double fed_G = seq.G() * (mode == rewards::Mode::Monotone ? rewards::monotone_scale() : 0.375);
    auto p = doco::default_params(network::spectral(mixing), fed_G, set.dim(), seq.horizon(),
                                  doco::Role::LinearDoco);
    p.L = 1;
    p.K = 1;
    auto engine = doco::make_engine(kind, std::move(ctx), p, fed_G);
    return BoostingReduction(std::move(engine), set, mode, make_node_streams(1, "sample.node", mixing.size()),
                             seq.G(), seq.beta());
  }
};

}  // namespace

TEST_CASE("non-monotone boosting plays the midpoint") {
  Setup s(3, sets::DecisionSet::capped_simplex(3, 1.5), rewards::Mode::NonMonotone, 40);
  auto b = s.boosting(doco::EngineKind::Dogd, rewards::Mode::NonMonotone);
  CHECK(b.alpha() == 0.25);
  for (long t = 0; t < s.seq.horizon(); ++t) {
    const Matrix played = b.step(s.seq, t);
    CHECK((played - 0.5 * b.preparatory()).cwiseAbs().maxCoeff() < 1e-15);
    for (Eigen::Index i = 0; i < played.rows(); ++i) {
      CHECK(s.set.contains(played.row(i).transpose(), 1e-12));
      CHECK(b.fed().row(i).norm() <= 0.375 * s.seq.G() + 1e-12);
    }
  }
}

TEST_CASE("box with a positive corner shrinks alpha") {
  Vector lo(2), hi(2);
  lo << 0.2, 0.1;
  hi << 1.0, 1.0;
  Setup s(3, sets::DecisionSet::box(lo, hi), rewards::Mode::NonMonotone, 10);
  CHECK(s.boosting(doco::EngineKind::Dogd, rewards::Mode::NonMonotone).alpha() == doctest::Approx(0.2));
}

TEST_CASE("monotone boosting plays the preparatory decision") {
  Setup s(4, sets::DecisionSet::knapsack(Vector::Ones(2), 1.2), rewards::Mode::Monotone, 40);
  auto b = s.boosting(doco::EngineKind::Dogd, rewards::Mode::Monotone);
  CHECK(b.alpha() == doctest::Approx(1.0 - std::exp(-1.0)));
  for (long t = 0; t < s.seq.horizon(); ++t) {
    const Matrix played = b.step(s.seq, t);
    CHECK(played == b.preparatory());
    for (Eigen::Index i = 0; i < played.rows(); ++i)
      CHECK(b.fed().row(i).norm() <= rewards::monotone_scale() * s.seq.G() + 1e-12);
  }
}

TEST_CASE("Frank-Wolfe chain") {
  Matrix w(2, 2);
  w << 0.3, 0.4, 0.1, 0.9;
  auto one = frank_wolfe_chain({w});
  REQUIRE(one.size() == 2);
  CHECK(one[0].norm() == 0.0);
  CHECK((one[1] - w).norm() < 1e-15);

  const Matrix ones = Matrix::Ones(1, 3);
  auto two = frank_wolfe_chain({ones, ones});
  REQUIRE(two.size() == 3);
  CHECK((two[1] - 0.5 * ones).norm() < 1e-15);
  CHECK((two[2] - 0.75 * ones).norm() < 1e-15);

  const auto set = sets::DecisionSet::capped_simplex(4, 1.3);
  Rng rng = make_stream(5, "test");
  std::normal_distribution<double> g;
  for (int b = 0; b < 1000; ++b) {
    std::vector<Matrix> dirs;
    for (int k = 0; k < 6; ++k) {
      Matrix v(2, 4);
      for (int i = 0; i < 2; ++i) {
        Vector c(4);
        for (int j = 0; j < 4; ++j) c(j) = g(rng);
        v.row(i) = set.lmo(c).transpose();
      }
      dirs.push_back(v);
    }
    for (const auto& x : frank_wolfe_chain(dirs))
      for (Eigen::Index i = 0; i < 2; ++i) CHECK(set.contains(x.row(i).transpose(), 1e-12));
  }
}

TEST_CASE("permutation assignment is unbiased") {
  rewards::FamilyParams p;
  p.d = 3;
  p.noise = 0.0;
  const auto seq = rewards::make_sequence(6, 8, 2, p);
  Rng rng = make_stream(6, "test");
  std::vector<Vector> chain;
  for (int k = 0; k < 8; ++k) chain.push_back(Vector::Constant(3, 0.1 * k));
  const auto r = permutation_unbiasedness_check(seq, 1, chain, 1, 10000, rng);
  CHECK(r.ok);

  // A single-round block is exact.
  const auto one = rewards::make_sequence(6, 1, 1, p);
  const auto r1 = permutation_unbiasedness_check(one, 1, {Vector::Constant(3, 0.2)}, 0, 10, rng);
  CHECK(r1.ok);
  CHECK(r1.worst_z < 1e-6);
}
