#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace dosm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Malformed user input: bad files, shapes, or parameter values.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration that cannot be executed as given (divisibility, set kind, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mathematical object failed one of its defining invariants.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(std::string_view bytes);

/// Independent RNG stream derived from a master seed and a stream name, e.g.
/// "rewards" or "engine.node.3".
Rng make_stream(std::uint64_t master_seed, std::string_view name);

std::vector<Rng> make_node_streams(std::uint64_t master_seed, std::string_view prefix,
                                   std::size_t n);

}  // namespace dosm
