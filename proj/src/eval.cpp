#include "dosm/eval.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "dosm/network.hpp"

namespace dosm::eval {

namespace {

constexpr int kAscentStarts = 32;
constexpr int kAscentIters = 3000;

// Allocation-free evaluation for the inner grid loop.
double quad_value(const rewards::Quadratic& q, const double* x, int d) {
  double v = q.c0;
  for (int j = 0; j < d; ++j) {
    double row = 0.0;
    for (int k = 0; k < d; ++k) row += q.H(j, k) * x[k];
    v += x[j] * (0.5 * row + q.h(j));
  }
  return v;
}

std::vector<double> axis(double lo, double hi, double res) {
  std::vector<double> pts;
  for (long k = 0;; ++k) {
    const double v = lo + static_cast<double>(k) * res;
    if (v >= hi - 1e-12) break;
    pts.push_back(v);
  }
  pts.push_back(hi);
  return pts;
}

void grid_search(const rewards::Quadratic& q, const sets::DecisionSet& set, double res,
                 OfflineOptimum& out) {
  const int d = set.dim();
  std::vector<std::vector<double>> axes;
  for (int j = 0; j < d; ++j) axes.push_back(axis(set.lower()(j), set.upper()(j), res));
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  Vector x(d);
  double best = -std::numeric_limits<double>::infinity();
  Vector best_x = set.inf_minimizer();
  const bool budgeted = set.kind() != sets::SetKind::Box;
  while (true) {
    double used = 0.0;
    for (int j = 0; j < d; ++j) {
      x(j) = axes[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
      if (budgeted) used += set.weights()(j) * x(j);
    }
    if (!budgeted || used <= set.budget()) {
      const double v = quad_value(q, x.data(), d);
      if (v > best) {
        best = v;
        best_x = x;
      }
    }
    int j = 0;
    for (; j < d; ++j) {
      auto& k = idx[static_cast<std::size_t>(j)];
      if (++k < axes[static_cast<std::size_t>(j)].size()) break;
      k = 0;
    }
    if (j == d) break;
  }
  out.grid_value = best;
  if (best > out.value || out.method.empty()) {
    out.value = best;
    out.x = best_x;
    out.method = "grid";
  }
}

void ascent_search(const rewards::Quadratic& q, const sets::DecisionSet& set, Rng& rng,
                   OfflineOptimum& out) {
  const int d = set.dim();
  const double beta = q.smoothness();
  const double step = beta > 0.0 ? 1.0 / beta : 1.0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double best = -std::numeric_limits<double>::infinity();
  Vector best_x;
  for (int s = 0; s < kAscentStarts; ++s) {
    Vector x;
    if (s == 0) {
      x = set.inf_minimizer();
    } else if (s == 1) {
      x = set.lmo(q.h);
    } else {
      Vector y(d);
      for (int j = 0; j < d; ++j) y(j) = u(rng);
      x = set.project(y);
    }
    for (int it = 0; it < kAscentIters; ++it) {
      Vector next = set.project(x + step * q.grad_unchecked(x));
      const double moved = (next - x).norm();
      x = std::move(next);
      if (moved < 1e-13) break;
    }
    const double v = q.value(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  out.ascent_value = best;
  if (best > out.value || out.method.empty()) {
    out.value = best;
    out.x = best_x;
    out.method = "ascent";
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw InputError("bad number \"" + s + "\"");
  return v;
}

long parse_long(const std::string& s) {
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw InputError("bad integer \"" + s + "\"");
  return v;
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

OfflineOptimum offline_opt(const rewards::Quadratic& objective, const sets::DecisionSet& set,
                           double resolution, OptMethod method, Rng& rng) {
  if (objective.dim() != set.dim()) throw InputError("offline_opt: dimension mismatch");
  OfflineOptimum out;
  out.value = -std::numeric_limits<double>::infinity();
  const int d = set.dim();
  if (method != OptMethod::Ascent) {
    if (d > 4) throw InputError("offline_opt: grid search refused for d > 4");
    if (!(resolution > 0.0)) throw InputError("offline_opt: resolution must be positive");
    grid_search(objective, set, resolution, out);
    out.gap_estimate = objective.gradient_bound() * resolution * std::sqrt(static_cast<double>(d));
  }
  if (method != OptMethod::Grid) ascent_search(objective, set, rng, out);
  if (method == OptMethod::Both)
    out.disagreement = std::abs(out.grid_value - out.ascent_value) > out.gap_estimate;
  return out;
}

OfflineOptimum offline_opt(const rewards::RewardSequence& seq, const sets::DecisionSet& set,
                           double resolution, OptMethod method, Rng& rng) {
  return offline_opt(seq.total(), set, resolution, method, rng);
}

std::size_t RegretTrace::nodes() const {
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.round != rows.front().round) break;
    ++n;
  }
  return n;
}

long RegretTrace::rounds() const { return rows.empty() ? 0 : rows.back().round; }

Vector RegretTrace::final_regret() const {
  const auto n = nodes();
  Vector out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    out(static_cast<Eigen::Index>(i)) = rows[rows.size() - n + i].alpha_regret;
  return out;
}

double RegretTrace::max_consensus() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.consensus_err);
  return m;
}

std::string format_decimal(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[512];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  if (ec != std::errc()) throw std::runtime_error("format_decimal: buffer too small");
  return std::string(buf, p);
}

void write_trace_csv(std::ostream& out, const RegretTrace& trace, const std::string& comment) {
  std::string buf;
  if (!comment.empty()) buf += "# " + comment + "\n";
  buf += kTraceHeader;
  buf += '\n';
  const std::string alpha = format_decimal(trace.alpha);
  const std::string seed = std::to_string(trace.seed);
  for (const auto& r : trace.rows) {
    buf += std::to_string(r.round);
    buf += ',';
    buf += std::to_string(r.node);
    buf += ',';
    buf += trace.algo;
    buf += ',';
    buf += alpha;
    buf += ',';
    buf += seed;
    for (double v : {r.inst_reward, r.cum_reward, r.alpha_regret, r.consensus_err}) {
      buf += ',';
      buf += format_decimal(v);
    }
    buf += '\n';
  }
  out << buf;
}

RegretTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!next_data_line(in, line) || line != kTraceHeader)
    throw InputError("trace csv: missing or unexpected header");
  RegretTrace trace;
  bool first = true;
  while (next_data_line(in, line)) {
    const auto cells = split(line);
    if (cells.size() != 9) throw InputError("trace csv: expected 9 columns");
    if (first) {
      trace.algo = cells[2];
      trace.alpha = parse_double(cells[3]);
      trace.seed = static_cast<std::uint64_t>(std::stoull(cells[4]));
      first = false;
    }
    TraceRow r;
    r.round = parse_long(cells[0]);
    r.node = static_cast<int>(parse_long(cells[1]));
    r.inst_reward = parse_double(cells[5]);
    r.cum_reward = parse_double(cells[6]);
    r.alpha_regret = parse_double(cells[7]);
    r.consensus_err = parse_double(cells[8]);
    trace.rows.push_back(r);
  }
  return trace;
}

void write_decisions_csv(std::ostream& out, const std::vector<Matrix>& decisions,
                         const std::string& comment) {
  std::string buf;
  if (!comment.empty()) buf += "# " + comment + "\n";
  buf += "round,node";
  const auto d = decisions.empty() ? 0 : decisions.front().cols();
  for (Eigen::Index j = 0; j < d; ++j) buf += ",x" + std::to_string(j);
  buf += '\n';
  for (std::size_t t = 0; t < decisions.size(); ++t) {
    const Matrix& m = decisions[t];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      buf += std::to_string(t + 1) + "," + std::to_string(i);
      for (Eigen::Index j = 0; j < m.cols(); ++j) buf += "," + format_decimal(m(i, j));
      buf += '\n';
    }
  }
  out << buf;
}

std::vector<Matrix> read_decisions_csv(std::istream& in) {
  std::string line;
  if (!next_data_line(in, line) || line.rfind("round,node", 0) != 0)
    throw InputError("decision csv: missing header");
  const auto d = static_cast<Eigen::Index>(split(line).size()) - 2;
  std::vector<std::vector<Eigen::RowVectorXd>> rows;
  while (next_data_line(in, line)) {
    const auto cells = split(line);
    if (static_cast<Eigen::Index>(cells.size()) != d + 2)
      throw InputError("decision csv: wrong column count");
    const long t = parse_long(cells[0]);
    const long i = parse_long(cells[1]);
    if (t < 1) throw InputError("decision csv: rounds are 1-based");
    if (static_cast<std::size_t>(t) > rows.size()) rows.resize(static_cast<std::size_t>(t));
    auto& round = rows[static_cast<std::size_t>(t - 1)];
    if (static_cast<std::size_t>(i) != round.size())
      throw InputError("decision csv: nodes must appear in order");
    Eigen::RowVectorXd x(d);
    for (Eigen::Index j = 0; j < d; ++j) x(j) = parse_double(cells[static_cast<std::size_t>(j + 2)]);
    round.push_back(x);
  }
  std::vector<Matrix> out;
  for (const auto& round : rows) {
    Matrix m(static_cast<Eigen::Index>(round.size()), d);
    for (std::size_t i = 0; i < round.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = round[i];
    out.push_back(std::move(m));
  }
  return out;
}

TraceBuilder::TraceBuilder(const rewards::RewardSequence& seq, Vector x_star, double alpha,
                           std::string algo, std::uint64_t seed)
    : seq_(&seq), x_star_(std::move(x_star)) {
  trace_.algo = std::move(algo);
  trace_.alpha = alpha;
  trace_.seed = seed;
  cum_ = Vector::Zero(static_cast<Eigen::Index>(seq.nodes()));
  trace_.rows.reserve(static_cast<std::size_t>(seq.horizon()) * seq.nodes());
}

void TraceBuilder::add_round(long t, const Matrix& played) {
  const auto& f = seq_->round_total(t);
  opt_prefix_ += f.value(x_star_);
  const auto consensus = network::consensus_error(played);
  for (Eigen::Index i = 0; i < played.rows(); ++i) {
    TraceRow r;
    r.round = t + 1;
    r.node = static_cast<int>(i);
    r.inst_reward = f.value(played.row(i).transpose());
    cum_(i) += r.inst_reward;
    r.cum_reward = cum_(i);
    r.alpha_regret = trace_.alpha * opt_prefix_ - r.cum_reward;
    r.consensus_err = consensus.per_node(i);
    trace_.rows.push_back(r);
  }
}

RegretTrace trace_from_decisions(const rewards::RewardSequence& seq,
                                 const std::vector<Matrix>& decisions, const Vector& x_star,
                                 double alpha, const std::string& algo, std::uint64_t seed) {
  TraceBuilder b(seq, x_star, alpha, algo, seed);
  for (std::size_t t = 0; t < decisions.size(); ++t) b.add_round(static_cast<long>(t), decisions[t]);
  return b.take();
}

std::vector<Vector> alpha_regret(const RegretTrace& trace, double alpha,
                                 const std::vector<double>& opt_prefix) {
  const auto n = trace.nodes();
  const auto T = static_cast<std::size_t>(trace.rounds());
  if (opt_prefix.size() != T) throw InputError("alpha_regret: need one comparator value per round");
  std::vector<Vector> out(T, Vector::Zero(static_cast<Eigen::Index>(n)));
  for (const auto& r : trace.rows) {
    const auto t = static_cast<std::size_t>(r.round - 1);
    out[t](r.node) = alpha * opt_prefix[t] - r.cum_reward;
  }
  return out;
}

SlopeFit sublinearity_fit(const std::vector<std::pair<double, double>>& points) {
  SlopeFit fit;
  std::vector<std::pair<double, double>> logs;
  for (auto [T, r] : points) {
    if (T > 0.0 && r > 0.0)
      logs.emplace_back(std::log(T), std::log(r));
    else
      ++fit.excluded;
  }
  fit.used = static_cast<int>(logs.size());
  if (logs.size() < 4) return fit;
  double mx = 0, my = 0;
  for (auto [x, y] : logs) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(logs.size());
  my /= static_cast<double>(logs.size());
  double sxx = 0, sxy = 0;
  for (auto [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.valid = true;
  return fit;
}

bool mc_mean_test(const std::vector<Vector>& samples, const Vector& target, double max_se) {
  if (samples.empty()) throw InputError("mc_mean_test: no samples");
  const double N = static_cast<double>(samples.size());
  Vector mean = Vector::Zero(target.size());
  for (const auto& s : samples) mean += s;
  mean /= N;
  Vector var = Vector::Zero(target.size());
  for (const auto& s : samples) var += (s - mean).cwiseAbs2();
  if (samples.size() > 1) var /= (N - 1.0);
  for (Eigen::Index j = 0; j < target.size(); ++j) {
    if (std::abs(mean(j) - target(j)) > max_se * std::sqrt(var(j) / N)) return false;
  }
  return true;
}

bool mc_mean_test(const std::vector<double>& samples, double target, double max_se) {
  std::vector<Vector> wrapped;
  wrapped.reserve(samples.size());
  for (double s : samples) wrapped.push_back(Vector::Constant(1, s));
  return mc_mean_test(wrapped, Vector::Constant(1, target), max_se);
}

}  // namespace dosm::eval
