#include <doctest.h>

#include <charconv>
#include <sstream>

#include "dosm/eval.hpp"

using namespace dosm;
using namespace dosm::eval;

TEST_CASE("offline optimum") {
  const auto set = sets::DecisionSet::capped_simplex(2, 1.0);
  Rng rng = make_stream(1, "test");
  const auto zero = offline_opt(rewards::Quadratic::zero(2), set, 0.01, OptMethod::Both, rng);
  CHECK(zero.value == 0.0);
  CHECK(set.contains(zero.x));

  rewards::Quadratic lin = rewards::Quadratic::zero(2);
  lin.h << 0.3, 0.7;
  const auto r = offline_opt(lin, set, 0.01, OptMethod::Ascent, rng);
  CHECK(r.value == doctest::Approx(lin.value(set.lmo(lin.h))).epsilon(1e-12));

  rewards::FamilyParams p;
  p.d = 2;
  for (int k = 0; k < 10; ++k) {
    const auto f = rewards::make_quadratic(p, rng);
    const auto both = offline_opt(f, set, 0.005, OptMethod::Both, rng);
    CHECK_FALSE(both.disagreement);
    CHECK(both.ascent_value >= both.grid_value - 1e-9);
  }
  CHECK_THROWS_AS(offline_opt(rewards::Quadratic::zero(5), sets::DecisionSet::unit_box(5), 0.1,
                              OptMethod::Grid, rng),
                  InputError);
}

TEST_CASE("decimal formatting round-trips") {
  Rng rng = make_stream(2, "test");
  std::normal_distribution<double> g(0.0, 1e3);
  for (int k = 0; k < 1000; ++k) {
    const double v = g(rng);
    const std::string s = format_decimal(v);
    CHECK(s.find('e') == std::string::npos);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
}

TEST_CASE("trace and decision CSV round trip") {
  rewards::FamilyParams p;
  p.d = 2;
  const auto seq = rewards::make_sequence(3, 5, 2, p);
  std::vector<Matrix> decisions;
  for (long t = 0; t < 5; ++t) decisions.push_back(Matrix::Constant(2, 2, 0.1 * static_cast<double>(t)));
  const Vector xs = Vector::Constant(2, 0.5);
  const auto tr = trace_from_decisions(seq, decisions, xs, 0.25, "demo", 3);
  CHECK(tr.rounds() == 5);
  CHECK(tr.nodes() == 2);

  std::stringstream csv;
  write_trace_csv(csv, tr, "config_hash=abc");
  const std::string text = csv.str();
  CHECK(text.rfind("# config_hash=abc\n", 0) == 0);
  CHECK(text.find(kTraceHeader) != std::string::npos);
  const auto back = read_trace_csv(csv);
  REQUIRE(back.rows.size() == tr.rows.size());
  for (std::size_t k = 0; k < tr.rows.size(); ++k) {
    CHECK(back.rows[k].alpha_regret == tr.rows[k].alpha_regret);
    CHECK(back.rows[k].cum_reward == tr.rows[k].cum_reward);
  }

  std::vector<double> prefix;
  double acc = 0.0;
  for (long t = 0; t < 5; ++t) prefix.push_back(acc += seq.round_total(t).value(xs));
  const auto R = alpha_regret(back, 0.25, prefix);
  for (const auto& row : tr.rows) CHECK(R[static_cast<std::size_t>(row.round - 1)](row.node) == row.alpha_regret);

  std::stringstream dcsv;
  write_decisions_csv(dcsv, decisions, "");
  const auto dback = read_decisions_csv(dcsv);
  REQUIRE(dback.size() == 5);
  for (std::size_t t = 0; t < 5; ++t) CHECK(dback[t] == decisions[t]);

  std::stringstream bad("round,node\n1,2\n");
  CHECK_THROWS_AS(read_trace_csv(bad), InputError);
}

TEST_CASE("sublinearity fit") {
  std::vector<std::pair<double, double>> constant, root;
  for (double T = 256; T <= 16384; T *= 2) {
    constant.emplace_back(T, 7.0);
    root.emplace_back(T, 3.0 * std::sqrt(T));
  }
  CHECK(sublinearity_fit(constant).slope == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sublinearity_fit(root).slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(sublinearity_fit({{1, 1}, {2, 2}, {4, 4}}).valid);
  const auto neg = sublinearity_fit({{1, -1}, {2, 2}, {4, 4}, {8, 8}, {16, 16}});
  CHECK(neg.valid);
  CHECK(neg.excluded == 1);
  CHECK(neg.slope == doctest::Approx(1.0));
}

TEST_CASE("statistical helpers") {
  CHECK_THROWS_AS(ks_statistic({}, [](double x) { return x; }), InputError);
  CHECK(ks_statistic({0.5}, [](double x) { return x; }) == doctest::Approx(0.5));
  CHECK(mc_mean_test(std::vector<double>{2.0, 2.0, 2.0}, 2.0, 4.0));
  CHECK_FALSE(mc_mean_test(std::vector<double>{2.0, 2.0, 2.0}, 2.1, 4.0));
}
