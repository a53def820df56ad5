#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dosm/eval.hpp"
#include "dosm/rewards.hpp"

using namespace dosm;
using namespace dosm::rewards;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double a : v) x(k++) = a;
  return x;
}

template <class F>
double integrate(F&& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

// Surrogate gradient by adaptive Gauss-Kronrod, one coordinate at a time.
Vector oracle_grad_F(const Quadratic& f, const Vector& x, const Vector& xinf, Mode mode) {
  Vector out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (mode == Mode::NonMonotone)
      out(j) = integrate(
          [&](double z) {
            const Vector q = 0.5 * z * (x - xinf) + xinf;
            return f.grad_unchecked(q)(j) / (8.0 * std::pow(1.0 - z / 2.0, 3));
          },
          0.0, 1.0);
    else
      out(j) = integrate([&](double z) { return std::exp(z - 1.0) * f.grad_unchecked(z * x)(j); },
                         0.0, 1.0);
  }
  return out;
}

}  // namespace

TEST_CASE("quadratic basics") {
  Quadratic f = Quadratic::zero(1);
  f.H(0, 0) = -1.0;
  f.h(0) = 1.0;
  Rng rng = make_stream(1, "test");
  CHECK(check_monotone(f, 200, rng).ok);
  CHECK(check_nonnegative(f, 200, rng).ok);
  CHECK(f.grad(Vector::Zero(1))(0) == 1.0);

  const auto zero = Quadratic::zero(3);
  CHECK(check_dr_submodular(zero, 100, rng).ok);
  CHECK(check_monotone(zero, 100, rng).ok);
  CHECK(check_nonnegative(zero, 100, rng).ok);
  CHECK(check_smooth(zero, 0.0, 100, rng).ok);
}

TEST_CASE("checkers accept nonpositive Hessians and reject a planted entry") {
  Rng rng = make_stream(2, "test");
  FamilyParams p;
  p.d = 4;
  for (int k = 0; k < 50; ++k) {
    const auto f = make_quadratic(p, rng);
    CHECK(f.H.maxCoeff() <= 0.0);
    CHECK(check_dr_submodular(f, 100, rng).ok);
  }
  Quadratic lin = Quadratic::zero(2);
  lin.h = vec({0.3, 0.4});
  const auto r = check_dr_submodular(lin, 100, rng);
  CHECK(r.ok);
  CHECK(r.worst < 1e-12);

  Quadratic bad = Quadratic::zero(2);
  bad.H(0, 1) = bad.H(1, 0) = 1.0;
  const auto b = check_dr_submodular(bad, 100, rng);
  CHECK_FALSE(b.ok);
  CHECK(b.coordinate >= 0);
  CHECK(b.witness_x.size() == 2);
}

TEST_CASE("reward sequences are reproducible") {
  FamilyParams p;
  p.d = 3;
  p.noise = 0.2;
  const auto a = make_sequence(9, 20, 3, p);
  const auto b = make_sequence(9, 20, 3, p);
  for (long t = 0; t < 20; ++t)
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(a.at(t, i).H == b.at(t, i).H);
      CHECK(a.at(t, i).h == b.at(t, i).h);
    }
}

TEST_CASE("stochastic gradients") {
  FamilyParams p;
  p.d = 3;
  const auto clean = make_sequence(4, 2, 1, p);
  Rng rng = make_stream(3, "test");
  const Vector x = vec({0.2, 0.5, 0.1});
  CHECK(clean.stoch_grad(0, 0, x, rng) == clean.grad(0, 0, x));

  p.noise = 0.5;
  const auto noisy = make_sequence(4, 2, 1, p);
  std::vector<Vector> draws;
  for (int k = 0; k < 100000; ++k) draws.push_back(noisy.stoch_grad(1, 0, x, rng));
  CHECK(eval::mc_mean_test(draws, noisy.grad(1, 0, x), 4.0));
}

TEST_CASE("boosting samplers") {
  CHECK(z_inverse_cdf(0.0) == 0.0);
  CHECK(z_inverse_cdf(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(z_inverse_cdf(1.0 / 3) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
  CHECK(zprime_inverse_cdf(0.0) == doctest::Approx(0.0));
  CHECK(zprime_inverse_cdf(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(zprime_inverse_cdf(0.5) == doctest::Approx(0.620115).epsilon(1e-6));

  const double zq =
      integrate([](double u) { return 1.0 / (3.0 * std::pow(1.0 - u / 2.0, 3)); }, 0.0, 2.0 - std::sqrt(2.0));
  CHECK(zq == doctest::Approx(1.0 / 3).epsilon(1e-12));
  const double zpq = integrate([](double u) { return std::exp(u - 1.0) / (1.0 - std::exp(-1.0)); }, 0.0,
                               zprime_inverse_cdf(0.5));
  CHECK(zpq == doctest::Approx(0.5).epsilon(1e-12));
  for (double c : {0.1, 0.37, 0.8}) {
    CHECK(z_inverse_cdf(z_cdf(c)) == doctest::Approx(c).epsilon(1e-12));
    CHECK(zprime_inverse_cdf(zprime_cdf(c)) == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("boosted query points") {
  const Vector xinf = vec({0.2, 0.1});
  const Vector xhat = vec({0.7, 0.4});
  for (double z : {0.0, 0.3, 1.0}) {
    CHECK((boost_query_nonmonotone(xinf, xinf, z).query - xinf).norm() < 1e-15);
  }
  CHECK((boost_query_nonmonotone(xhat, xinf, 0.0).query - xinf).norm() < 1e-15);
  CHECK(boost_query_nonmonotone(xhat, xinf, 0.5).scale == doctest::Approx(3.0 / 8));
  CHECK(boost_query_monotone(xhat, 0.0).query.norm() == 0.0);
  CHECK((boost_query_monotone(xhat, 1.0).query - xhat).norm() < 1e-15);

  FamilyParams p;
  p.d = 2;
  p.mode = Mode::Monotone;
  const auto seq = make_sequence(5, 1, 1, p);
  Rng rng = make_stream(4, "test");
  const Vector g0 = boosted_grad_monotone(seq, 0, 0, xhat, 0.0, rng);
  CHECK((g0 - (1.0 - std::exp(-1.0)) * seq.at(0, 0).h).norm() < 1e-14);
}

TEST_CASE("surrogate gradient quadrature") {
  Quadratic lin = Quadratic::zero(3);
  lin.h = vec({1.0, -2.0, 0.5});
  const Vector x = vec({0.3, 0.3, 0.3});
  CHECK((grad_F_numeric(lin, x, Vector::Zero(3), Mode::NonMonotone) - 0.375 * lin.h).norm() < 1e-12);
  CHECK((grad_F_numeric(lin, x, Vector::Zero(3), Mode::Monotone) - (1.0 - std::exp(-1.0)) * lin.h).norm() <
        1e-12);
  Quadratic c = Quadratic::zero(2);
  c.c0 = 3.0;
  CHECK(grad_F_numeric(c, vec({0.5, 0.5}), Vector::Zero(2), Mode::NonMonotone).norm() == 0.0);

  Rng rng = make_stream(6, "test");
  std::uniform_real_distribution<double> u(0, 1);
  for (Mode mode : {Mode::NonMonotone, Mode::Monotone}) {
    FamilyParams p;
    p.d = 4;
    p.mode = mode;
    for (int k = 0; k < 10; ++k) {
      const auto f = make_quadratic(p, rng);
      const Vector xi = vec({0.1 * u(rng), 0.1 * u(rng), 0, 0});
      const Vector xx = vec({u(rng), u(rng), u(rng), u(rng)});
      CHECK((grad_F_numeric(f, xx, xi, mode) - oracle_grad_F(f, xx, xi, mode)).norm() < 1e-10);
    }
  }
}

TEST_CASE("boosted estimators are unbiased") {
  FamilyParams p;
  p.d = 3;
  p.noise = 0.3;
  const auto seq = make_sequence(7, 1, 1, p);
  const Vector xinf = Vector::Zero(3);
  const Vector xhat = vec({0.6, 0.2, 0.9});
  Rng rng = make_stream(7, "test");
  std::vector<Vector> draws;
  for (int k = 0; k < 100000; ++k)
    draws.push_back(boosted_grad_nonmonotone(seq, 0, 0, xhat, xinf, sample_Z(rng), rng));
  CHECK(eval::mc_mean_test(draws, oracle_grad_F(seq.at(0, 0), xhat, xinf, Mode::NonMonotone), 4.0));
  for (const auto& v : draws) CHECK(v.norm() <= 3.0 / 8 * seq.G() + 1e-12);

  p.mode = Mode::Monotone;
  const auto mseq = make_sequence(8, 1, 1, p);
  draws.clear();
  for (int k = 0; k < 100000; ++k)
    draws.push_back(boosted_grad_monotone(mseq, 0, 0, xhat, sample_Zprime(rng), rng));
  CHECK(eval::mc_mean_test(draws, oracle_grad_F(mseq.at(0, 0), xhat, xinf, Mode::Monotone), 4.0));
}
