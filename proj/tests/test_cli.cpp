#include <doctest.h>

#include <sstream>

#include "dosm/config.hpp"
#include "dosm/runner.hpp"
#include "dosm/svg.hpp"

using namespace dosm;
using namespace dosm::cli;

namespace {

const char* kMinimal = R"({"version": 1, "horizon": 64, "dim": 2,
  "topology": {"kind": "ring", "nodes": 3},
  "set": {"kind": "capped_simplex", "budget": 1.0},
  "algorithm": {"reduction": "boosting", "engine": "d_ogd"}})";

}  // namespace

TEST_CASE("config parsing is strict") {
  const auto cfg = parse_config(kMinimal);
  CHECK(cfg.horizon == 64);
  CHECK(cfg.topology.nodes == 3);
  CHECK_THROWS_AS(parse_config(R"({"horizon": 64})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"version": 2})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"version": 1, "horizn": 64})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"version": 1, "topology": {"kind": "torus"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"version": 1, "horizon": -3})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("config hash is canonical") {
  const auto a = parse_config(kMinimal);
  const auto b = parse_config(to_json(a));
  CHECK(config_hash(a) == config_hash(b));
  auto c = a;
  c.horizon = 65;
  CHECK(config_hash(a) != config_hash(c));
  CHECK(hash_hex(0x1234).size() == 16);
}

TEST_CASE("run: alpha, padding and determinism") {
  auto cfg = parse_config(kMinimal);
  const auto r = run_once(cfg, 5, 64);
  CHECK(r.alpha == 0.25);
  CHECK(r.padded_T == 64);
  CHECK(r.warnings.empty());
  std::ostringstream a, b;
  eval::write_trace_csv(a, r.trace, "x");
  eval::write_trace_csv(b, run_once(cfg, 5, 64).trace, "x");
  CHECK(a.str() == b.str());

  cfg.algorithm.engine = "d_ftpl";
  const auto padded = run_once(cfg, 5, 61);
  CHECK(padded.padded_T > 61);
  REQUIRE(padded.warnings.size() >= 1);
  CHECK(padded.warnings[0].find("T=61") != std::string::npos);
  CHECK(padded.warnings[0].find("T=" + std::to_string(padded.padded_T)) != std::string::npos);
}

TEST_CASE("single-node monotone run equals the centralized learner") {
  auto cfg = parse_config(kMinimal);
  cfg.topology.kind = "path";
  cfg.topology.nodes = 1;
  cfg.rewards.mode = "monotone";
  const std::uint64_t seed = 4;
  const auto r = run_once(cfg, seed, 64);

  // Direct construction: one learner, no network.
  const auto set = sets::DecisionSet::capped_simplex(2, 1.0);
  const auto topo = network::Topology::path(1);
  const auto mixing = network::build_lazy_metropolis(topo);
  const auto seq = rewards::make_sequence(seed, 64, 1, family_params(cfg));
  doco::EngineContext ctx;
  ctx.mixing = &mixing;
  ctx.set = &set;
  ctx.horizon = 64;
  ctx.node_rngs = make_node_streams(seed, "engine.node", 1);
  const double fed_G = seq.G() * rewards::monotone_scale();
  reductions::BoostingReduction learner(doco::make_engine(doco::EngineKind::Dogd, std::move(ctx), {}, fed_G),
                                        set, rewards::Mode::Monotone,
                                        make_node_streams(seed, "sample.node", 1), seq.G(), seq.beta());
  eval::TraceBuilder tb(seq, r.opt.x, learner.alpha(), learner.name(), seed);
  for (long t = 0; t < 64; ++t) tb.add_round(t, learner.step(seq, t));
  std::ostringstream a, b;
  eval::write_trace_csv(a, r.trace, "");
  eval::write_trace_csv(b, tb.trace(), "");
  CHECK(a.str() == b.str());
}

TEST_CASE("sweep output") {
  auto cfg = parse_config(kMinimal);
  const auto sw = run_sweep(cfg, {32, 64}, {1, 2}, 2);
  CHECK(sw.points.size() == 2);
  CHECK(sw.points[0].se >= 0.0);
  bool warned = false;
  for (const auto& w : sw.warnings) warned = warned || w.find("fewer than 4") != std::string::npos;
  CHECK(warned);
  std::ostringstream csv;
  write_sweep_csv(csv, sw, "h");
  CHECK(csv.str().find("T,mean_final_regret,se,slope_so_far\n") != std::string::npos);

  // Synthetic constant regrets give slope 0.
  std::vector<std::pair<double, double>> pts;
  for (double T = 64; T <= 1024; T *= 2) pts.emplace_back(T, 2.5);
  CHECK(eval::sublinearity_fit(pts).slope == doctest::Approx(0.0));
}

TEST_CASE("svg rendering") {
  eval::RegretTrace tr;
  tr.algo = "demo";
  tr.alpha = 0.25;
  tr.rows.push_back({1, 0, 1.0, 1.0, 2.0, 0.1});
  tr.rows.push_back({2, 0, 1.0, 2.0, 3.0, 0.05});
  const std::string doc = svg::render(svg::trace_panels(tr));
  CHECK(doc.find("<svg") != std::string::npos);
  CHECK(doc.find("</svg>") != std::string::npos);
  CHECK(doc.find("round t") != std::string::npos);
  CHECK(svg::count_points(doc) == 4);  // two rounds in each of the two panels
  const std::string sweep = svg::render(svg::sweep_panels({{64, 3.0, 0.1}, {128, 4.0, 0.1}}));
  CHECK(svg::count_points(sweep) == 2);
}
