#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dosm/config.hpp"
#include "dosm/runner.hpp"
#include "dosm/svg.hpp"
#include "dosm/verify.hpp"

namespace fs = std::filesystem;
using namespace dosm;
using namespace dosm::cli;

namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  const char* env = std::getenv("DOSM_LOG");
  const std::string v = env ? env : "warn";
  if (v == "error") return Level::Error;
  if (v == "info") return Level::Info;
  if (v == "debug") return Level::Debug;
  return Level::Warn;
}

void log(Level lvl, const std::string& msg) {
  static const Level threshold = log_level();
  static const char* names[] = {"error", "warning", "info", "debug"};
  if (lvl <= threshold) std::cerr << "dosm: " << names[static_cast<int>(lvl)] << ": " << msg << '\n';
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string out_path(const std::string& dir, const std::string& name) {
  const fs::path p(name);
  return p.is_absolute() ? name : (fs::path(dir) / p).string();
}

std::string header(const RunConfig& cfg, const std::string& extra) {
  return "config_hash=" + hash_hex(config_hash(cfg)) + (extra.empty() ? "" : " " + extra);
}

void print_params(const char* label, const doco::EngineParams& p) {
  std::cout << "  " << std::left << std::setw(22) << label << " L=" << p.L << " K=" << p.K
            << " theta=" << p.theta << " eta=" << p.eta << '\n';
}

int cmd_spectrum(const std::string& config, const std::string& topology_file,
                 const std::string& matrix_file, std::uint64_t seed) {
  RunConfig cfg;
  network::Topology topo;
  if (!topology_file.empty()) {
    std::ifstream in(topology_file);
    if (!in) throw InputError("cannot open " + topology_file);
    topo = network::Topology::read_edge_list(in);
  } else {
    if (!config.empty()) cfg = load_config(config);
    topo = build_topology(cfg.topology, seed);
  }
  const auto comps = topo.components();
  if (comps.size() > 1) {
    std::ostringstream os;
    os << "topology is disconnected: " << comps.size() << " components:";
    for (const auto& c : comps) {
      os << " {";
      for (std::size_t k = 0; k < c.size(); ++k) os << (k ? "," : "") << c[k];
      os << '}';
    }
    throw InputError(os.str());
  }
  std::optional<network::MixingMatrix> mix;
  if (!matrix_file.empty()) {
    std::ifstream in(matrix_file);
    if (!in) throw InputError("cannot open " + matrix_file);
    std::vector<std::vector<double>> rows;
    for (std::string line; std::getline(in, line);) {
      if (line.empty() || line[0] == '#') continue;
      std::vector<double> row;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) {
        try {
          row.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw InputError("matrix: bad number \"" + cell + "\"");
        }
      }
      rows.push_back(row);
    }
    const auto n = rows.size();
    Matrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) throw InputError("matrix: row " + std::to_string(i) + " is not length " + std::to_string(n));
      for (std::size_t j = 0; j < n; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    const auto bad = network::MixingMatrix::violations(a, topo);
    if (!bad.empty()) {
      std::string msg = "invalid mixing matrix:";
      for (const auto& b : bad) msg += "\n  " + b;
      throw InvariantError(msg);
    }
    mix.emplace(a, topo);
  } else {
    mix.emplace(network::build_lazy_metropolis(topo));
  }
  const auto prof = network::spectral(*mix);
  const long T = cfg.horizon;
  const int d = cfg.dim;
  std::cout << std::setprecision(10) << "n       " << prof.n << "\nsigma2  " << prof.sigma2
            << "\nrho     " << prof.rho << "\nC       " << prof.C << "\ntheta   " << prof.theta << '\n';
  const auto dm = doco::dmfw_params(prof, 1.0, d, T);
  std::cout << "C'(L=" << dm.L << ", T=" << T << ") " << prof.c_prime(T, dm.L) << '\n';
  std::cout << "default parameters at T=" << T << ", d=" << d << ", G=1:\n";
  print_params("AD-OSPA (smooth)", doco::default_params(prof, 1.0, d, T, doco::Role::SmoothDoco));
  print_params("AD-OSPA (linear)", doco::default_params(prof, 1.0, d, T, doco::Role::LinearDoco));
  print_params("D-FTPL", doco::default_params(prof, 1.0, d, T, doco::Role::Dftpl));
  std::cout << "  " << std::left << std::setw(22) << "Meta-Frank-Wolfe" << " L=" << dm.L
            << " inner_L=" << dm.inner_L << " inner_eta=" << dm.inner_eta
            << " padded_T=" << dm.padded_T << '\n';
  return 0;
}

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed, const std::string& out_dir) {
  const RunConfig cfg = load_config(config);
  const std::uint64_t s = seed.value_or(cfg.seeds.front());
  RunOptions opts;
  opts.keep_decisions = !cfg.output.decisions.empty();
  log(Level::Info, "running " + cfg.algorithm.reduction + "+" + cfg.algorithm.engine + " seed " +
                       std::to_string(s) + " T=" + std::to_string(cfg.horizon));
  const auto r = run_once(cfg, s, cfg.horizon, opts);
  for (const auto& w : r.warnings) log(Level::Warn, w);
  const std::string comment = header(cfg, "seed=" + std::to_string(s) + " T=" + std::to_string(r.padded_T));
  std::ostringstream trace;
  eval::write_trace_csv(trace, r.trace, comment);
  const auto trace_path = out_path(out_dir, cfg.output.trace);
  write_file_atomic(trace_path, trace.str());
  if (opts.keep_decisions) {
    std::ostringstream dec;
    eval::write_decisions_csv(dec, r.decisions, comment);
    write_file_atomic(out_path(out_dir, cfg.output.decisions), dec.str());
  }
  std::cout << std::setprecision(8) << r.algo << " alpha=" << r.alpha << " T=" << r.padded_T
            << " seed=" << s << " opt=" << r.opt.value << " (" << r.opt.method << ")\n";
  std::cout << "final alpha-regret per node:";
  for (Eigen::Index i = 0; i < r.final_regret.size(); ++i) std::cout << ' ' << r.final_regret(i);
  std::cout << "\ncertified bound per node:";
  for (Eigen::Index i = 0; i < r.certified_bound.size(); ++i) std::cout << ' ' << r.certified_bound(i);
  std::cout << "\nmax consensus error " << r.max_consensus << "\nexchanges per round mean "
            << r.mean_exchanges << " max " << r.max_exchanges << "\ntrace written to " << trace_path
            << '\n';
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& out_dir, int jobs) {
  const RunConfig cfg = load_config(config);
  std::vector<long> horizons = cfg.horizons;
  if (horizons.empty()) horizons.push_back(cfg.horizon);
  const auto sw = run_sweep(cfg, horizons, cfg.seeds, jobs);
  for (const auto& w : sw.warnings) log(Level::Warn, w);
  std::ostringstream csv;
  write_sweep_csv(csv, sw, header(cfg, "seeds=" + std::to_string(cfg.seeds.size())));
  const auto path = out_path(out_dir, cfg.output.sweep);
  write_file_atomic(path, csv.str());
  std::cout << std::setprecision(6) << "T,mean_final_regret,se,mean_certified_bound\n";
  for (const auto& p : sw.points)
    std::cout << p.T << ',' << p.mean_final_regret << ',' << p.se << ',' << p.mean_bound << '\n';
  if (horizons.size() < 4)
    std::cout << "slope omitted (fewer than 4 horizons)\n";
  else {
    if (sw.regret_fit.valid)
      std::cout << "log-log slope of mean final alpha-regret " << sw.regret_fit.slope << " ("
                << sw.regret_fit.used << " points)\n";
    else
      std::cout << "alpha-regret slope unavailable (" << sw.regret_fit.excluded
                << " nonpositive means)\n";
    if (sw.bound_fit.valid)
      std::cout << "log-log slope of mean certified bound " << sw.bound_fit.slope << '\n';
  }
  std::cout << "sweep written to " << path << '\n';
  return 0;
}

int cmd_verify(const std::vector<std::string>& names, bool quick, int jobs) {
  std::vector<int> ids;
  for (const auto& n : names) ids.push_back(suite_id(n));
  bool ok = true;
  run_suites(quick ? Scale::Quick : Scale::Full, ids, jobs, [&](const CriterionResult& r) {
    ok = ok && r.pass;
    std::cout << format_result(r) << std::endl;
  });
  return ok ? 0 : 1;
}

int cmd_plot(const std::string& csv, const std::string& out) {
  const std::string text = slurp(csv);
  std::istringstream in(text);
  std::string first, caption;
  std::getline(in, first);
  if (!first.empty() && first[0] == '#') {
    caption = first;
    std::getline(in, first);
  }
  std::vector<svg::Panel> panels;
  if (first.rfind("T,mean_final_regret", 0) == 0) {
    std::vector<svg::SweepRow> rows;
    for (std::string line; std::getline(in, line);) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string a, b, c;
      std::getline(ss, a, ',');
      std::getline(ss, b, ',');
      std::getline(ss, c, ',');
      try {
        rows.push_back({std::stod(a), std::stod(b), std::stod(c)});
      } catch (const std::exception&) {
        throw InputError("sweep CSV: bad row \"" + line + "\"");
      }
    }
    panels = svg::sweep_panels(rows);
  } else {
    std::istringstream again(text);
    panels = svg::trace_panels(eval::read_trace_csv(again));
  }
  const std::string target = out.empty() ? fs::path(csv).replace_extension(".svg").string() : out;
  write_file_atomic(target, svg::render(panels, caption));
  std::cout << "plot written to " << target << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized online DR-submodular maximization simulator"};
  app.require_subcommand(1);
  std::string config, out_dir = ".", topology_file, matrix_file, plot_out;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool quick = false;
  std::vector<std::string> suites_sel;
  std::string csv;

  auto* spectrum = app.add_subcommand("spectrum", "spectral profile and default parameters");
  spectrum->add_option("--config", config, "run configuration (JSON)");
  spectrum->add_option("--topology", topology_file, "edge-list file instead of a config");
  spectrum->add_option("--matrix", matrix_file, "mixing matrix CSV to validate and analyze");
  spectrum->add_option("--seed", seed, "seed for random topologies");

  auto* run = app.add_subcommand("run", "one seeded run, writes a trace CSV");
  run->add_option("--config", config, "run configuration (JSON)")->required();
  auto* run_seed = run->add_option("--seed", seed, "master seed (default: first config seed)");
  run->add_option("--out", out_dir, "output directory");

  auto* sweep = app.add_subcommand("sweep", "(T, seed) grid and slope report");
  sweep->add_option("--config", config, "run configuration (JSON)")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "acceptance property suites");
  verify->add_option("--suite", suites_sel, "suite name or number (repeatable; default all)");
  verify->add_flag("--quick", quick, "reduced sample sizes");
  verify->add_option("--jobs", jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot", "SVG from a trace or sweep CSV");
  plot->add_option("csv", csv, "trace or sweep CSV")->required();
  plot->add_option("--out", plot_out, "output SVG path (default: CSV path with .svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*spectrum) return cmd_spectrum(config, topology_file, matrix_file, seed);
    if (*run) return cmd_run(config, run_seed->count() ? std::optional<std::uint64_t>(seed) : std::nullopt, out_dir);
    if (*sweep) return cmd_sweep(config, out_dir, jobs);
    if (*verify) return cmd_verify(suites_sel, quick, jobs);
    if (*plot) return cmd_plot(csv, plot_out);
  } catch (const ConfigError& e) {
    log(Level::Error, std::string("invalid configuration: ") + e.what());
    return 2;
  } catch (const InputError& e) {
    log(Level::Error, std::string("invalid input: ") + e.what());
    return 2;
  } catch (const InvariantError& e) {
    log(Level::Error, e.what());
    return *spectrum ? 2 : 1;
  } catch (const std::exception& e) {
    log(Level::Error, e.what());
    return 1;
  }
  return 1;
}
