#include <doctest.h>

#include "dosm/doco.hpp"
#include "dosm/eval.hpp"

using namespace dosm;
using namespace dosm::doco;

namespace {

struct Fixture {
  network::MixingMatrix mixing;
  sets::DecisionSet set;
  Fixture(network::Topology t, sets::DecisionSet s)
      : mixing(network::build_lazy_metropolis(t)), set(std::move(s)) {}
  EngineContext ctx(long T, std::uint64_t seed = 1) const {
    EngineContext c;
    c.mixing = &mixing;
    c.set = &set;
    c.horizon = T;
    c.node_rngs = make_node_streams(seed, "engine.node", mixing.size());
    return c;
  }
};

}  // namespace

TEST_CASE("default parameters") {
  network::SpectralProfile p;
  p.n = 16;
  p.C = 14;
  p.theta = 0.5;
  const auto smooth = default_params(p, 1.0, 2, 1000, Role::SmoothDoco);
  CHECK(smooth.L == 14);
  CHECK(smooth.K == 14);
  CHECK(smooth.eta == doctest::Approx(std::sqrt(2.0 * 1000 * 14)));
  const auto lin = default_params(p, 1.0, 2, 64, Role::LinearDoco);
  CHECK(lin.L == 14);
  p.C = 4;
  CHECK(default_params(p, 1.0, 2, 64, Role::LinearDoco).eta == doctest::Approx(std::sqrt(512.0)));
  CHECK(std::sqrt(512.0) == doctest::Approx(22.6274).epsilon(1e-5));
  CHECK(pad_horizon(100, 8) == 104);
  CHECK(pad_horizon(96, 8) == 96);
}

TEST_CASE("unit-ball sampler") {
  Rng rng = make_stream(2, "test");
  const int d = 3;
  std::vector<Vector> draws;
  std::vector<double> norms;
  for (int k = 0; k < 100000; ++k) {
    draws.push_back(ball_sample(rng, d));
    CHECK(draws.back().norm() <= 1.0);
    norms.push_back(draws.back().norm());
  }
  CHECK(eval::mc_mean_test(draws, Vector::Zero(d), 4.0));
  CHECK(eval::mc_mean_test(norms, d / (d + 1.0), 4.0));
}

TEST_CASE("engines start at the shared initial point") {
  Fixture fx(network::Topology::ring(4), sets::DecisionSet::capped_simplex(3, 1.5));
  auto p = default_params(network::spectral(fx.mixing), 1.0, 3, 64, Role::LinearDoco);
  p.L = 16;
  for (auto kind : {EngineKind::AdOspa, EngineKind::Dftpl}) {
    auto e = make_engine(kind, fx.ctx(64), kind == EngineKind::Dftpl ? EngineParams{4, 2, p.theta, p.eta} : p, 1.0);
    const Vector x0 = fx.set.lmo(Vector::Zero(3));
    const long first_block = kind == EngineKind::Dftpl ? 4 : p.L;
    Rng rng = make_stream(3, "test");
    std::normal_distribution<double> g;
    for (long t = 0; t < first_block; ++t) {
      for (Eigen::Index i = 0; i < 4; ++i) CHECK((e->decisions().row(i).transpose() - x0).norm() == 0.0);
      Matrix grads(4, 3);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 3; ++j) grads(i, j) = g(rng);
      e->feed(grads);
    }
  }
}

TEST_CASE("single node: gossip is the identity") {
  Fixture one(network::Topology::path(1), sets::DecisionSet::unit_box(2));
  auto prof = network::spectral(one.mixing);
  CHECK(prof.C >= 1);
  auto p = default_params(prof, 1.0, 2, 32, Role::LinearDoco);
  p.L = 8;
  auto e = make_engine(EngineKind::AdOspa, one.ctx(32), p, 1.0);
  Matrix c(1, 2);
  c << 1.0, -1.0;
  for (int t = 0; t < 32; ++t) e->feed(c);
  const auto& a = dynamic_cast<const AdOspa&>(*e);
  for (double v : a.z_consensus()) CHECK(v == 0.0);
}

TEST_CASE("AD-OSPA with zero losses keeps z at zero") {
  Fixture fx(network::Topology::path(3), sets::DecisionSet::capped_simplex(2, 1.0));
  const auto prof = network::spectral(fx.mixing);
  auto p = default_params(prof, 1.0, 2, 64, Role::LinearDoco);
  p.L = 16;
  AdOspa e(fx.ctx(64), p);
  for (int t = 0; t < 64; ++t) e.feed(Matrix::Zero(3, 2));
  CHECK(e.z().norm() == 0.0);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(fx.set.contains(e.decisions().row(i).transpose(), 1e-12));
}

TEST_CASE("D-OGD") {
  SUBCASE("zero gradients keep the network average") {
    Fixture fx(network::Topology::ring(5), sets::DecisionSet::unit_box(2));
    Dogd e(fx.ctx(50), 1.0);
    const Vector avg = e.decisions().colwise().mean().transpose();
    for (int t = 0; t < 50; ++t) e.feed(Matrix::Zero(5, 2));
    for (Eigen::Index i = 0; i < 5; ++i) CHECK((e.decisions().row(i).transpose() - avg).norm() < 1e-12);
  }
  SUBCASE("fixed linear loss saturates at the optimal corner") {
    Fixture fx(network::Topology::ring(4), sets::DecisionSet::unit_box(2));
    Dogd e(fx.ctx(400), 1.0);
    Matrix c(4, 2);
    for (int i = 0; i < 4; ++i) c.row(i) << 1.0, -1.0;  // loss gradient: decrease x0, increase x1
    for (int t = 0; t < 400; ++t) e.feed(c);
    const Vector corner = fx.set.lmo(-c.row(0).transpose());
    for (Eigen::Index i = 0; i < 4; ++i) CHECK((e.decisions().row(i).transpose() - corner).norm() < 1e-9);
  }
}

TEST_CASE("D-FTPL decisions stay feasible and consensus is tight") {
  Fixture fx(network::Topology::path(3), sets::DecisionSet::knapsack((Vector(3) << 1.0, 2.0, 0.5).finished(), 1.5));
  const auto prof = network::spectral(fx.mixing);
  const long T = 512;
  auto p = default_params(prof, 1.0, 3, T, Role::Dftpl);
  const long Tp = pad_horizon(T, p.L);
  p.eta = std::sqrt(3.0 * static_cast<double>(Tp * p.L));
  Dftpl e(fx.ctx(Tp), p);
  Rng rng = make_stream(4, "test");
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (long t = 0; t < Tp; ++t) {
    Matrix c(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c(i, j) = u(rng);
    e.feed(c);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(fx.set.contains(e.decisions().row(i).transpose(), 1e-12));
  }
  for (double v : e.g_consensus()) CHECK(v <= 2.0 * static_cast<double>(p.L) * std::sqrt(0.75) / static_cast<double>(Tp));
}
