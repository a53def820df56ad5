#include "dosm/network.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace dosm::network {

namespace {

constexpr double kStochasticTol = 1e-12;
constexpr double kPsdTol = 1e-12;

std::string describe_components(const std::vector<std::vector<std::size_t>>& comps) {
  std::ostringstream os;
  os << comps.size() << " components:";
  for (const auto& c : comps) {
    os << " {";
    for (std::size_t k = 0; k < c.size(); ++k) os << (k ? "," : "") << c[k];
    os << "}";
  }
  return os.str();
}

}  // namespace

Topology::Topology(std::size_t n, std::vector<Edge> edges) : n_(n) {
  if (n == 0) throw InputError("topology needs at least one node");
  std::set<Edge> seen;
  for (auto [i, j] : edges) {
    if (i >= n || j >= n) {
      throw InputError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                       ") out of range for n=" + std::to_string(n));
    }
    if (i == j) throw InputError("self-loop at node " + std::to_string(i));
    Edge e = std::minmax(i, j);
    if (!seen.insert(e).second) {
      throw InputError("duplicate edge (" + std::to_string(e.first) + "," +
                       std::to_string(e.second) + ")");
    }
    edges_.push_back(e);
  }
}

Topology Topology::path(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Topology(n, std::move(e));
}

Topology Topology::ring(std::size_t n) {
  if (n < 3) return path(n);
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Topology(n, std::move(e));
}

Topology Topology::complete(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Topology(n, std::move(e));
}

Topology Topology::star(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 1; i < n; ++i) e.emplace_back(0, i);
  return Topology(n, std::move(e));
}

Topology Topology::random_connected(std::size_t n, double p, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::set<Edge> chosen;
  for (std::size_t k = 1; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    chosen.insert(std::minmax(order[k], order[pick(rng)]));
  }
  std::bernoulli_distribution coin(std::clamp(p, 0.0, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!chosen.count({i, j}) && coin(rng)) chosen.insert({i, j});
  return Topology(n, std::vector<Edge>(chosen.begin(), chosen.end()));
}

std::vector<std::size_t> Topology::degrees() const {
  std::vector<std::size_t> deg(n_, 0);
  for (auto [i, j] : edges_) {
    ++deg[i];
    ++deg[j];
  }
  return deg;
}

bool Topology::has_edge(std::size_t i, std::size_t j) const {
  Edge e = std::minmax(i, j);
  return std::find(edges_.begin(), edges_.end(), e) != edges_.end();
}

std::vector<std::vector<std::size_t>> Topology::components() const {
  std::vector<std::size_t> parent(n_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [i, j] : edges_) {
    auto a = find(i), b = find(j);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::vector<std::size_t>> comps;
  std::vector<long> slot(n_, -1);
  for (std::size_t v = 0; v < n_; ++v) {
    auto r = find(v);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(comps.size());
      comps.emplace_back();
    }
    comps[static_cast<std::size_t>(slot[r])].push_back(v);
  }
  return comps;
}

Topology Topology::read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::size_t declared = 0;
  std::size_t max_index = 0;
  bool any = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream hs(line.substr(first + 1));
      std::string key;
      std::size_t value = 0;
      if (hs >> key && key == "nodes:" && hs >> value) declared = value;
      continue;
    }
    std::istringstream ls(line);
    long long i = -1, j = -1;
    std::string extra;
    if (!(ls >> i >> j) || (ls >> extra) || i < 0 || j < 0) {
      throw InputError("edge list line " + std::to_string(lineno) + ": expected \"i j\"");
    }
    edges.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    max_index = std::max({max_index, edges.back().first, edges.back().second});
    any = true;
  }
  std::size_t n = any ? max_index + 1 : 1;
  if (declared) {
    if (declared < n) throw InputError("declared node count smaller than largest edge index");
    n = declared;
  }
  return Topology(n, std::move(edges));
}

void Topology::write_edge_list(std::ostream& out) const {
  out << "# nodes: " << n_ << '\n';
  for (auto [i, j] : edges_) out << i << ' ' << j << '\n';
}

MixingMatrix::MixingMatrix(Matrix entries, const Topology& topology) : a_(std::move(entries)) {
  auto bad = violations(a_, topology);
  if (!bad.empty()) {
    std::string msg = "invalid mixing matrix:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw InvariantError(msg);
  }
}

std::vector<std::string> MixingMatrix::violations(const Matrix& a, const Topology& topology) {
  std::vector<std::string> out;
  const auto n = static_cast<Eigen::Index>(topology.size());
  if (a.rows() != n || a.cols() != n) {
    out.push_back("shape " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                  " does not match n=" + std::to_string(n));
    return out;
  }
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > kStochasticTol) out.push_back("not symmetric");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(a.row(i).sum() - 1.0) > kStochasticTol)
      out.push_back("row " + std::to_string(i) + " does not sum to 1");
    if (std::abs(a.col(i).sum() - 1.0) > kStochasticTol)
      out.push_back("column " + std::to_string(i) + " does not sum to 1");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (a(i, j) < 0.0) out.push_back("negative entry at (" + std::to_string(i) + "," +
                                       std::to_string(j) + ")");
      if (i != j && a(i, j) > 0.0 &&
          !topology.has_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))
        out.push_back("weight on non-edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
  if (!out.empty()) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kPsdTol) out.push_back("not positive semidefinite");
  if (n > 1) {
    Vector ev = eig.eigenvalues().cwiseAbs();
    std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
    if (ev(1) >= 1.0 - kStochasticTol) out.push_back("second singular value is 1");
  }
  return out;
}

void MixingMatrix::write_csv(std::ostream& out) const {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    for (Eigen::Index j = 0; j < a_.cols(); ++j) os << (j ? "," : "") << a_(i, j);
    os << '\n';
  }
  out << os.str();
}

MixingMatrix build_lazy_metropolis(const Topology& topology) {
  auto comps = topology.components();
  if (comps.size() > 1) {
    throw InputError("topology is disconnected: " + describe_components(comps));
  }
  const auto n = static_cast<Eigen::Index>(topology.size());
  const auto deg = topology.degrees();
  Matrix m = Matrix::Zero(n, n);
  for (auto [i, j] : topology.edges()) {
    const double w = 1.0 / (1.0 + static_cast<double>(std::max(deg[i], deg[j])));
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
    m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = w;
  }
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = 1.0 - m.row(i).sum();
  Matrix a = 0.5 * (Matrix::Identity(n, n) + m);
  return MixingMatrix(std::move(a), topology);
}

int SpectralProfile::c_prime(long horizon, long block) const {
  const double arg = std::sqrt(static_cast<double>(n)) * static_cast<double>(horizon) /
                     static_cast<double>(block);
  return 2 * static_cast<int>(std::ceil(std::log(arg) / rho));
}

int accelerated_rounds(std::size_t n, double rho) {
  const double num = std::sqrt(2.0) * std::log(std::sqrt(14.0 * static_cast<double>(n)));
  const double den = (std::sqrt(2.0) - 1.0) * std::sqrt(rho);
  return std::max(1, static_cast<int>(std::ceil(num / den)));
}

double chebyshev_theta(double sigma2) { return 1.0 / (1.0 + std::sqrt(1.0 - sigma2 * sigma2)); }

SpectralProfile spectral(const MixingMatrix& a) {
  SpectralProfile p;
  p.n = a.size();
  if (p.n > 1) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.matrix(), Eigen::EigenvaluesOnly);
    Vector ev = eig.eigenvalues().cwiseAbs();
    std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
    p.sigma2 = ev(1);
  }
  if (p.sigma2 >= 1.0 - 1e-12) {
    throw InvariantError("second singular value " + std::to_string(p.sigma2) +
                         " is numerically 1; the graph is effectively disconnected");
  }
  p.rho = 1.0 - p.sigma2;
  p.C = accelerated_rounds(p.n, p.rho);
  p.theta = chebyshev_theta(p.sigma2);
  return p;
}

Matrix gossip_step(const MixingMatrix& a, const Matrix& states) {
  if (states.rows() != a.matrix().rows()) {
    throw InputError("gossip: state has " + std::to_string(states.rows()) + " rows, matrix is " +
                     std::to_string(a.matrix().rows()) + "x" + std::to_string(a.matrix().rows()));
  }
  return a.matrix() * states;
}

Matrix chebyshev_gossip_step(const MixingMatrix& a, double theta, const Matrix& zk,
                             const Matrix& zkm1) {
  if (zk.rows() != zkm1.rows() || zk.cols() != zkm1.cols()) {
    throw InputError("chebyshev gossip: zk and zkm1 shapes differ");
  }
  Matrix out = gossip_step(a, zk);
  out *= (1.0 + theta);
  out.noalias() -= theta * zkm1;
  return out;
}

ConsensusError consensus_error(const Matrix& states) {
  ConsensusError e;
  e.per_node = Vector::Zero(states.rows());
  if (states.rows() == 0) return e;
  const Eigen::RowVectorXd mean = states.colwise().mean();
  double sq = 0.0;
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    const double d2 = (states.row(i) - mean).squaredNorm();
    sq += d2;
    e.per_node(i) = std::sqrt(d2);
  }
  e.max = e.per_node.maxCoeff();
  e.frobenius = std::sqrt(sq);
  return e;
}

}  // namespace dosm::network
