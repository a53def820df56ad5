#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "dosm/common.hpp"

namespace dosm::network {

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected simple graph over nodes 0..n-1. Edges are stored with first < second.
class Topology {
 public:
  Topology() = default;
  /// Throws InputError on self-loops, duplicates, or out-of-range endpoints.
  Topology(std::size_t n, std::vector<Edge> edges);

  static Topology path(std::size_t n);
  static Topology ring(std::size_t n);
  static Topology complete(std::size_t n);
  static Topology star(std::size_t n);
  /// Erdos-Renyi G(n, p) conditioned on connectivity: a random spanning tree is
  /// laid down first, then every other pair is added with probability p.
  static Topology random_connected(std::size_t n, double p, Rng& rng);

  std::size_t size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::vector<std::size_t> degrees() const;
  bool has_edge(std::size_t i, std::size_t j) const;

  /// Connected components, each sorted ascending; components ordered by smallest node.
  std::vector<std::vector<std::size_t>> components() const;
  bool connected() const { return components().size() <= 1; }

  /// Edge-list text: one "i j" pair per line, 0-indexed. Lines starting with '#'
  /// are comments, except "# nodes: N" which declares the node count (needed
  /// when trailing nodes are isolated or n = 1).
  static Topology read_edge_list(std::istream& in);
  void write_edge_list(std::ostream& out) const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

/// Symmetric, doubly stochastic, PSD communication matrix supported on a graph.
class MixingMatrix {
 public:
  /// Validates every invariant against `topology`; throws InvariantError with
  /// all violations listed.
  MixingMatrix(Matrix entries, const Topology& topology);

  const Matrix& matrix() const { return a_; }
  std::size_t size() const { return static_cast<std::size_t>(a_.rows()); }

  /// One line per violated invariant; empty when `a` is a valid mixing matrix for `topology`.
  static std::vector<std::string> violations(const Matrix& a, const Topology& topology);

  void write_csv(std::ostream& out) const;

 private:
  Matrix a_;
};

/// Metropolis weights 1/(1+max(deg_i,deg_j)) on edges, remainder on the diagonal,
/// then lazified as (I+M)/2. Throws InputError naming the components when the
/// graph is disconnected.
MixingMatrix build_lazy_metropolis(const Topology& topology);

struct SpectralProfile {
  std::size_t n = 1;
  double sigma2 = 0.0;
  double rho = 1.0;
  int C = 1;
  double theta = 0.5;

  /// 2*ceil(ln(sqrt(n)*T/L)/rho): the inner block length used under Meta-Frank-Wolfe.
  int c_prime(long horizon, long block) const;
};

/// sigma2 from a symmetric eigensolve. Throws InvariantError when sigma2 is
/// numerically 1 (the graph is effectively disconnected).
SpectralProfile spectral(const MixingMatrix& a);

/// ceil(sqrt(2) ln(sqrt(14 n)) / ((sqrt(2)-1) sqrt(rho)))
int accelerated_rounds(std::size_t n, double rho);
double chebyshev_theta(double sigma2);

/// Row i of the result is sum_j A_ij * states.row(j).
Matrix gossip_step(const MixingMatrix& a, const Matrix& states);

/// Row i of the result is (1+theta) sum_j A_ij zk.row(j) - theta * zkm1.row(i).
Matrix chebyshev_gossip_step(const MixingMatrix& a, double theta, const Matrix& zk,
                             const Matrix& zkm1);

struct ConsensusError {
  Vector per_node;  // ||row_i - mean row||_2
  double max = 0.0;
  double frobenius = 0.0;
};

ConsensusError consensus_error(const Matrix& states);

}  // namespace dosm::network
