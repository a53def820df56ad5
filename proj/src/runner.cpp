#include "dosm/runner.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace dosm::cli {

namespace {

Plan full_plan(const RunConfig& cfg, const Instance& inst, long T) {
  Plan p;
  p.nominal_T = T;
  if (cfg.algorithm.reduction == "dmfw") {
    auto dp = doco::dmfw_params(inst.profile, 1.0, cfg.dim, T);
    if (cfg.algorithm.L) {
      dp.L = *cfg.algorithm.L;
      dp.inner_L = std::max(2L, static_cast<long>(inst.profile.c_prime(T, dp.L)));
      dp.padded_T = doco::pad_horizon(T, dp.L * dp.inner_L);
    }
    p.L = dp.L;
    p.inner_L = dp.inner_L;
    p.block = dp.L * dp.inner_L;
    p.padded_T = dp.padded_T;
    return p;
  }
  const auto kind = doco::engine_kind_from_string(cfg.algorithm.engine);
  if (kind == doco::EngineKind::Dogd) {
    p.L = 1;
  } else {
    const auto role =
        kind == doco::EngineKind::AdOspa ? doco::Role::SmoothDoco : doco::Role::Dftpl;
    p.L = cfg.algorithm.L ? *cfg.algorithm.L
                          : doco::default_params(inst.profile, 1.0, cfg.dim, T, role).L;
    if (kind == doco::EngineKind::Dftpl && p.L % 2 != 0) ++p.L;
  }
  p.block = p.L;
  p.padded_T = doco::pad_horizon(T, p.L);
  return p;
}

}  // namespace

network::Topology build_topology(const TopologySpec& spec, std::uint64_t seed) {
  using network::Topology;
  if (spec.kind == "path") return Topology::path(spec.nodes);
  if (spec.kind == "ring") return Topology::ring(spec.nodes);
  if (spec.kind == "complete") return Topology::complete(spec.nodes);
  if (spec.kind == "star") return Topology::star(spec.nodes);
  if (spec.kind == "random") {
    Rng rng = make_stream(seed, "net");
    return Topology::random_connected(spec.nodes, spec.edge_prob, rng);
  }
  std::ifstream in(spec.file);
  if (!in) throw InputError("cannot open topology file " + spec.file);
  return Topology::read_edge_list(in);
}

sets::DecisionSet build_set(const SetSpec& spec, int d) {
  auto vec = [](const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
  };
  if (spec.kind == "capped_simplex") return sets::DecisionSet::capped_simplex(d, spec.budget);
  if (spec.kind == "knapsack") return sets::DecisionSet::knapsack(vec(spec.weights), spec.budget);
  const Vector lo = spec.lower.empty() ? Vector::Zero(d) : vec(spec.lower);
  const Vector hi = spec.upper.empty() ? Vector::Ones(d) : vec(spec.upper);
  return sets::DecisionSet::box(lo, hi);
}

rewards::FamilyParams family_params(const RunConfig& cfg) {
  rewards::FamilyParams p;
  p.d = cfg.dim;
  p.density = cfg.rewards.density;
  p.scale = cfg.rewards.scale;
  p.noise = cfg.rewards.noise;
  p.mode = cfg.rewards.mode == "monotone" ? rewards::Mode::Monotone : rewards::Mode::NonMonotone;
  return p;
}

Instance build_instance(const RunConfig& cfg, std::uint64_t seed) {
  auto topo = build_topology(cfg.topology, seed);
  auto mixing = network::build_lazy_metropolis(topo);
  auto profile = network::spectral(mixing);
  return Instance{std::move(topo), std::move(mixing), profile, build_set(cfg.set, cfg.dim)};
}

Plan plan_horizon(const RunConfig& cfg, const Instance& inst, long T) {
  return full_plan(cfg, inst, T);
}

std::unique_ptr<reductions::Learner> make_learner(const RunConfig& cfg, const Instance& inst,
                                                  const Plan& p,
                                                  const rewards::RewardSequence& seq,
                                                  std::uint64_t seed) {
  const long T = seq.horizon();
  const std::size_t n = inst.topology.size();
  if (seq.nodes() != n) throw ConfigError("reward sequence and topology disagree on n");
  const int d = cfg.dim;
  const double G = seq.G();

  if (cfg.algorithm.reduction == "dmfw") {
    if (T % (p.L * p.inner_L) != 0) throw ConfigError("dmfw: horizon is not a multiple of L*C'");
    const long inner_T = T / p.L;
    std::vector<std::unique_ptr<doco::DocoEngine>> engines;
    for (long k = 0; k < p.L; ++k) {
      doco::EngineContext ctx;
      ctx.mixing = &inst.mixing;
      ctx.set = &inst.set;
      ctx.horizon = inner_T;
      ctx.node_rngs = make_node_streams(seed, "engine." + std::to_string(k) + ".node", n);
      doco::EngineParams ep;
      ep.L = p.inner_L;
      ep.K = static_cast<int>(p.inner_L / 2);
      ep.theta = cfg.algorithm.theta.value_or(inst.profile.theta);
      ep.eta = cfg.algorithm.eta.value_or(
          G * std::sqrt(static_cast<double>(d) * static_cast<double>(inner_T) *
                        static_cast<double>(p.inner_L)));
      engines.push_back(doco::make_engine(doco::EngineKind::Dftpl, std::move(ctx), ep, G));
    }
    return std::make_unique<reductions::Dmfw>(std::move(engines), inst.set,
                                              make_node_streams(seed, "grad.node", n),
                                              make_stream(seed, "permutation"), G, seq.beta());
  }

  const auto mode =
      cfg.rewards.mode == "monotone" ? rewards::Mode::Monotone : rewards::Mode::NonMonotone;
  const double fed_G =
      G * (mode == rewards::Mode::Monotone ? rewards::monotone_scale() : rewards::kNonMonotoneScale);
  const auto kind = doco::engine_kind_from_string(cfg.algorithm.engine);
  doco::EngineParams ep;
  if (kind != doco::EngineKind::Dogd) {
    const auto role =
        kind == doco::EngineKind::AdOspa ? doco::Role::SmoothDoco : doco::Role::Dftpl;
    ep = doco::default_params(inst.profile, fed_G, d, T, role);
    const long L = p.L;
    ep.L = L;
    if (kind == doco::EngineKind::Dftpl) ep.K = static_cast<int>(L / 2);
    if (cfg.algorithm.K) ep.K = *cfg.algorithm.K;
    if (cfg.algorithm.theta) ep.theta = *cfg.algorithm.theta;
    ep.eta = cfg.algorithm.eta.value_or(
        fed_G * std::sqrt(static_cast<double>(d) * static_cast<double>(T) * static_cast<double>(L)));
  }
  doco::EngineContext ctx;
  ctx.mixing = &inst.mixing;
  ctx.set = &inst.set;
  ctx.horizon = T;
  ctx.node_rngs = make_node_streams(seed, "engine.node", n);
  auto engine = doco::make_engine(kind, std::move(ctx), ep, fed_G);
  return std::make_unique<reductions::BoostingReduction>(
      std::move(engine), inst.set, mode, make_node_streams(seed, "sample.node", n), G, seq.beta(),
      kind == doco::EngineKind::AdOspa ? reductions::BoundKind::Smooth
                                       : reductions::BoundKind::Lipschitz);
}

RunResult run_once(const RunConfig& cfg, std::uint64_t seed, long T, const RunOptions& opts) {
  const Instance inst = build_instance(cfg, seed);
  const Plan plan = full_plan(cfg, inst, T);
  RunResult r;
  r.seed = seed;
  r.nominal_T = T;
  r.padded_T = plan.padded_T;
  if (plan.padded_T != T)
    r.warnings.push_back("horizon padded from T=" + std::to_string(T) + " to T=" +
                         std::to_string(plan.padded_T) + " (block " + std::to_string(plan.block) +
                         ")");
  const auto seq =
      rewards::make_sequence(seed, plan.padded_T, inst.topology.size(), family_params(cfg));

  auto learner = make_learner(cfg, inst, plan, seq, seed);
  r.algo = learner->name();
  r.alpha = learner->alpha();

  Rng opt_rng = make_stream(seed, "offline");
  const auto method = cfg.offline.method == "grid"   ? eval::OptMethod::Grid
                      : cfg.offline.method == "both" ? eval::OptMethod::Both
                                                     : eval::OptMethod::Ascent;
  r.opt = eval::offline_opt(seq, inst.set, cfg.offline.resolution, method, opt_rng);
  if (r.opt.disagreement)
    r.warnings.push_back("offline optimum: grid and ascent disagree beyond the Lipschitz slack");

  eval::TraceBuilder builder(seq, r.opt.x, r.alpha, r.algo, seed);
  long exchanges = 0;
  for (long t = 0; t < seq.horizon(); ++t) {
    const Matrix& played = learner->step(seq, t);
    builder.add_round(t, played);
    if (opts.keep_decisions) r.decisions.push_back(played);
    exchanges += learner->exchanges_last_round();
    r.max_exchanges = std::max(r.max_exchanges, learner->exchanges_last_round());
  }
  r.mean_exchanges = static_cast<double>(exchanges) / static_cast<double>(seq.horizon());
  r.certified_bound = learner->certified_bound();
  r.trace = builder.take();
  r.final_regret = r.trace.final_regret();
  r.max_consensus = r.trace.max_consensus();
  if (!opts.keep_trace) r.trace.rows.clear();
  return r;
}

SweepResult run_sweep(const RunConfig& cfg, const std::vector<long>& horizons,
                      const std::vector<std::uint64_t>& seeds, int jobs) {
  if (horizons.empty()) throw ConfigError("sweep: no horizons given");
  struct Job {
    std::size_t h, s;
  };
  std::vector<Job> work;
  for (std::size_t h = 0; h < horizons.size(); ++h)
    for (std::size_t s = 0; s < seeds.size(); ++s) work.push_back({h, s});

  const std::size_t S = seeds.size();
  std::vector<double> regret(work.size()), bound(work.size());
  std::vector<long> padded(horizons.size(), 0);
  std::vector<std::string> warnings;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;

  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= work.size()) return;
      try {
        RunOptions opts;
        opts.keep_trace = false;
        const auto r = run_once(cfg, seeds[work[k].s], horizons[work[k].h], opts);
        regret[k] = r.final_regret.mean();
        bound[k] = r.certified_bound.mean();
        std::lock_guard lock(mu);
        if (work[k].s == 0) {
          padded[work[k].h] = r.padded_T;
          for (const auto& w : r.warnings) warnings.push_back(w);
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = work.size();
        return;
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  auto mean_se = [&](const std::vector<double>& v, std::size_t h) {
    double m = 0.0;
    for (std::size_t s = 0; s < S; ++s) m += v[h * S + s];
    m /= static_cast<double>(S);
    double var = 0.0;
    for (std::size_t s = 0; s < S; ++s) var += (v[h * S + s] - m) * (v[h * S + s] - m);
    const double se = S > 1 ? std::sqrt(var / static_cast<double>(S - 1) / static_cast<double>(S)) : 0.0;
    return std::pair{m, se};
  };

  SweepResult out;
  out.warnings = std::move(warnings);
  std::vector<std::pair<double, double>> rpts, bpts;
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    SweepPoint p;
    p.nominal_T = horizons[h];
    p.T = padded[h];
    std::tie(p.mean_final_regret, p.se) = mean_se(regret, h);
    std::tie(p.mean_bound, p.bound_se) = mean_se(bound, h);
    rpts.emplace_back(static_cast<double>(p.T), p.mean_final_regret);
    bpts.emplace_back(static_cast<double>(p.T), p.mean_bound);
    const auto fit = eval::sublinearity_fit(rpts);
    p.slope_valid = fit.valid;
    p.slope_so_far = fit.slope;
    out.points.push_back(p);
  }
  out.regret_fit = eval::sublinearity_fit(rpts);
  out.bound_fit = eval::sublinearity_fit(bpts);
  if (horizons.size() < 4)
    out.warnings.push_back("fewer than 4 horizons: slope omitted");
  else if (out.regret_fit.excluded > 0)
    out.warnings.push_back(std::to_string(out.regret_fit.excluded) +
                           " nonpositive mean regrets excluded from the slope fit");
  return out;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep, const std::string& comment) {
  std::string buf;
  if (!comment.empty()) buf += "# " + comment + "\n";
  buf += "T,mean_final_regret,se,slope_so_far\n";
  for (const auto& p : sweep.points) {
    buf += std::to_string(p.T) + "," + eval::format_decimal(p.mean_final_regret) + "," +
           eval::format_decimal(p.se) + ",";
    if (p.slope_valid) buf += eval::format_decimal(p.slope_so_far);
    buf += '\n';
  }
  out << buf;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace dosm::cli
