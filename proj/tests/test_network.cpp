#include <doctest.h>

#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "dosm/network.hpp"

using namespace dosm;
using namespace dosm::network;

TEST_CASE("lazy metropolis on small graphs") {
  SUBCASE("single edge") {
    // Metropolis gives all-1/2; lazification moves it to 3/4 and 1/4.
    Matrix expect(2, 2);
    expect << 0.75, 0.25, 0.25, 0.75;
    const auto A = build_lazy_metropolis(Topology::path(2)).matrix();
    CHECK((A - expect).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("3-node path") {
    Matrix expect(3, 3);
    expect << 5.0 / 6, 1.0 / 6, 0, 1.0 / 6, 2.0 / 3, 1.0 / 6, 0, 1.0 / 6, 5.0 / 6;
    const auto A = build_lazy_metropolis(Topology::path(3)).matrix();
    CHECK((A - expect).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("one node") {
    const auto A = build_lazy_metropolis(Topology::path(1)).matrix();
    REQUIRE(A.rows() == 1);
    CHECK(A(0, 0) == 1.0);
  }
}

TEST_CASE("disconnected graph is rejected with its components") {
  const Topology t(4, {{0, 1}, {2, 3}});
  CHECK(t.components().size() == 2);
  try {
    build_lazy_metropolis(t);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("{0,1}") != std::string::npos);
    CHECK(msg.find("{2,3}") != std::string::npos);
  }
}

TEST_CASE("mixing matrix invariants are enforced") {
  const auto topo = Topology::path(3);
  Matrix bad = Matrix::Identity(3, 3);
  bad(0, 2) = bad(2, 0) = 0.1;  // not an edge, rows no longer sum to 1
  CHECK(!MixingMatrix::violations(bad, topo).empty());
  CHECK_THROWS_AS(MixingMatrix(bad, topo), InvariantError);
  CHECK(MixingMatrix::violations(build_lazy_metropolis(topo).matrix(), topo).empty());
}

TEST_CASE("spectral profile") {
  const auto p = spectral(build_lazy_metropolis(Topology::path(3)));
  CHECK(p.sigma2 == doctest::Approx(5.0 / 6).epsilon(1e-12));
  CHECK(p.rho == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(spectral(build_lazy_metropolis(Topology::path(1))).rho == 1.0);

  // Brute-force eigenvalues from the full spectrum.
  Rng rng = make_stream(3, "test");
  for (int k = 0; k < 10; ++k) {
    const auto A = build_lazy_metropolis(Topology::random_connected(12, 0.3, rng));
    Eigen::SelfAdjointEigenSolver<Matrix> es(A.matrix());
    auto ev = es.eigenvalues();
    std::vector<double> mags;
    for (Eigen::Index i = 0; i < ev.size(); ++i) mags.push_back(std::abs(ev(i)));
    std::sort(mags.rbegin(), mags.rend());
    CHECK(spectral(A).sigma2 == doctest::Approx(mags[1]).epsilon(1e-10));
  }
}

TEST_CASE("accelerated rounds and Chebyshev weight against high-precision evaluation") {
  using big = boost::multiprecision::cpp_bin_float_50;
  const big n = 16, rho = big(1) / 2;
  const big val = sqrt(big(2)) * log(sqrt(14 * n)) / ((sqrt(big(2)) - 1) * sqrt(rho));
  CHECK(accelerated_rounds(16, 0.5) == static_cast<int>(ceil(val)));
  CHECK(accelerated_rounds(16, 0.5) == 14);

  const big s2 = big(5) / 6;
  const big theta = 1 / (1 + sqrt(1 - s2 * s2));
  CHECK(chebyshev_theta(5.0 / 6) == doctest::Approx(static_cast<double>(theta)).epsilon(1e-14));
  CHECK(chebyshev_theta(5.0 / 6) == doctest::Approx(0.644010).epsilon(1e-6));
}

TEST_CASE("inner block length under Meta-Frank-Wolfe") {
  SpectralProfile p;
  p.n = 4;
  p.rho = 1.0 / 6;
  CHECK(p.c_prime(512, 8) == 60);
}

TEST_CASE("gossip steps") {
  const MixingMatrix pair(Matrix::Constant(2, 2, 0.5), Topology::path(2));
  Matrix X(2, 2);
  X << 0, 2, 2, 0;
  CHECK((gossip_step(pair, X) - Matrix::Ones(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

  const auto single = build_lazy_metropolis(Topology::path(1));
  Matrix one(1, 3);
  one << 1, 2, 3;
  CHECK(gossip_step(single, one) == one);

  const auto path = build_lazy_metropolis(Topology::path(3));
  Matrix e = Matrix::Zero(3, 1);
  e(0, 0) = 1.0;
  for (int k = 0; k < 25; ++k) {
    e = gossip_step(path, e);
    CHECK(e.mean() == doctest::Approx(1.0 / 3).epsilon(1e-14));
  }
}

TEST_CASE("Chebyshev recursion") {
  const auto A = build_lazy_metropolis(Topology::path(3));
  Matrix same = Matrix::Ones(3, 2) * 0.7;
  CHECK((chebyshev_gossip_step(A, 0.4, same, same) - same).cwiseAbs().maxCoeff() < 1e-15);

  Rng rng = make_stream(5, "test");
  std::normal_distribution<double> g;
  Matrix zk(3, 2), zm(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) zk(i, j) = g(rng), zm(i, j) = g(rng);
  CHECK((chebyshev_gossip_step(A, 0.0, zk, zm) - gossip_step(A, zk)).cwiseAbs().maxCoeff() < 1e-15);

  // K = C accelerated steps beat K plain steps.
  const auto prof = spectral(A);
  Matrix z0 = Matrix::Zero(3, 2);
  z0(0, 0) = 1.0;
  Matrix a = z0, a_prev = z0, b = z0;
  for (int k = 0; k < prof.C; ++k) {
    Matrix next = chebyshev_gossip_step(A, prof.theta, a, a_prev);
    a_prev = a;
    a = next;
    b = gossip_step(A, b);
  }
  CHECK(consensus_error(a).max < consensus_error(b).max);
}

TEST_CASE("consensus error") {
  CHECK(consensus_error(Matrix::Ones(4, 3)).max == 0.0);
  Matrix X(2, 2);
  X << 1, 0, -1, 0;
  const auto e = consensus_error(X);
  CHECK(e.per_node(0) == doctest::Approx(1.0));
  CHECK(e.per_node(1) == doctest::Approx(1.0));

  Rng rng = make_stream(8, "test");
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix Y(4, 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) Y(i, j) = u(rng);
  const auto ce = consensus_error(Y);
  double fro = 0.0;
  for (int i = 0; i < 4; ++i) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double m = (Y(0, j) + Y(1, j) + Y(2, j) + Y(3, j)) / 4.0;
      s += (Y(i, j) - m) * (Y(i, j) - m);
    }
    CHECK(ce.per_node(i) == doctest::Approx(std::sqrt(s)).epsilon(1e-13));
    fro += s;
  }
  CHECK(ce.frobenius == doctest::Approx(std::sqrt(fro)).epsilon(1e-13));
}

TEST_CASE("edge list round trip") {
  std::stringstream ss("# nodes: 5\n0 1\n1 2\n# comment\n2 3\n");
  const auto t = Topology::read_edge_list(ss);
  CHECK(t.size() == 5);
  CHECK(t.components().size() == 2);
  std::stringstream out;
  t.write_edge_list(out);
  const auto back = Topology::read_edge_list(out);
  CHECK(back.size() == 5);
  CHECK(back.edges() == t.edges());
  std::stringstream bad("0 0\n");
  CHECK_THROWS_AS(Topology::read_edge_list(bad), InputError);
}
