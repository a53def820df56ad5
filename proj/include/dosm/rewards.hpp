#pragma once

#include <string>
#include <vector>

#include "dosm/common.hpp"

namespace dosm::rewards {

/// f(x) = 1/2 x^T H x + h^T x + c0 with every entry of H nonpositive, which makes
/// f continuous DR-submodular on [0,1]^d.
struct Quadratic {
  Matrix H;
  Vector h;
  double c0 = 0.0;

  int dim() const { return static_cast<int>(h.size()); }
  double value(const Vector& x) const { return 0.5 * x.dot(H * x) + h.dot(x) + c0; }
  /// Hx + h. Throws InputError when x is outside [0,1]^d.
  Vector grad(const Vector& x) const;
  /// Same as grad() without the domain check.
  Vector grad_unchecked(const Vector& x) const { return H * x + h; }

  /// Spectral norm of H.
  double smoothness() const;
  /// sup over [0,1]^d of ||Hx + h||_2. The norm is convex in x, so the supremum
  /// sits at a vertex; vertices are enumerated for d <= 16.
  double gradient_bound() const;

  Quadratic& operator+=(const Quadratic& other);
  static Quadratic zero(int d);
};

bool in_unit_cube(const Vector& x, double tol = 1e-12);

enum class Mode { NonMonotone, Monotone };

std::string to_string(Mode mode);

struct FamilyParams {
  int d = 2;
  /// Probability that an off-diagonal pair of H is nonzero.
  double density = 1.0;
  /// Magnitude scale of the entries of H and h.
  double scale = 1.0;
  /// Radius bound of the additive gradient noise.
  double noise = 0.0;
  Mode mode = Mode::NonMonotone;
};

/// Uniform on the sphere of radius noise * u, u ~ U[0,1]: mean zero, norm <= noise.
Vector sample_noise(Rng& rng, int d, double noise);

/// Oblivious T x n grid of quadratic rewards, fixed before any learner runs.
class RewardSequence {
 public:
  /// `fns` is round-major: fns[t * n + i] is f_t^i, t in [0, T).
  RewardSequence(long horizon, std::size_t nodes, std::vector<Quadratic> fns, double noise,
                 bool monotone);

  long horizon() const { return horizon_; }
  std::size_t nodes() const { return nodes_; }
  int dim() const { return dim_; }
  double noise() const { return noise_; }
  bool monotone() const { return monotone_; }
  /// Uniform bound on stochastic gradient norms: max sup ||grad f|| + noise.
  double G() const { return G_; }
  double beta() const { return beta_; }

  const Quadratic& at(long t, std::size_t i) const {
    return fns_[static_cast<std::size_t>(t) * nodes_ + i];
  }
  /// f_t = sum_i f_t^i.
  const Quadratic& round_total(long t) const { return round_totals_[static_cast<std::size_t>(t)]; }
  /// sum_t f_t.
  const Quadratic& total() const { return total_; }

  Vector grad(long t, std::size_t i, const Vector& x) const { return at(t, i).grad(x); }
  /// Unbiased, norm bounded by G() with probability one.
  Vector stoch_grad(long t, std::size_t i, const Vector& x, Rng& rng) const;

 private:
  long horizon_;
  std::size_t nodes_;
  int dim_;
  std::vector<Quadratic> fns_;
  std::vector<Quadratic> round_totals_;
  Quadratic total_;
  double noise_;
  bool monotone_;
  double G_ = 0.0;
  double beta_ = 0.0;
};

/// Random quadratic with nonpositive H. Non-monotone mode uses the offset
/// c0 = ||h||_1 + sum |H_ij|, hence f >= 0 on [0,1]^d; monotone mode sets
/// c0 = 0 and h_j >= -(H 1)_j so grad f >= 0 on [0,1]^d and f(0) = 0.
Quadratic make_quadratic(const FamilyParams& params, Rng& rng);

RewardSequence make_sequence(std::uint64_t seed, long horizon, std::size_t nodes,
                             const FamilyParams& params);

// Boosting distributions. Z has CDF ((1 - c/2)^-2 - 1)/3, Z' has CDF
// (e^(c-1) - e^-1)/(1 - 1/e); both are sampled by inversion.
double z_cdf(double c);
double z_inverse_cdf(double p);
double zprime_cdf(double c);
double zprime_inverse_cdf(double p);
double sample_Z(Rng& rng);
double sample_Zprime(Rng& rng);

inline constexpr double kNonMonotoneScale = 3.0 / 8.0;
double monotone_scale();  // 1 - 1/e

struct BoostSample {
  double z = 0.0;
  Vector query;
  double scale = 0.0;
};

/// Query point (z/2)(xhat - xinf) + xinf with multiplier 3/8.
BoostSample boost_query_nonmonotone(const Vector& xhat, const Vector& xinf, double z);
/// Query point z * xhat with multiplier 1 - 1/e.
BoostSample boost_query_monotone(const Vector& xhat, double z);

/// (3/8) * stochastic gradient of f_t^i at the non-monotone query point.
Vector boosted_grad_nonmonotone(const RewardSequence& seq, long t, std::size_t i,
                                const Vector& xhat, const Vector& xinf, double z, Rng& rng);
/// (1 - 1/e) * stochastic gradient of f_t^i at z * xhat.
Vector boosted_grad_monotone(const RewardSequence& seq, long t, std::size_t i, const Vector& xhat,
                             double z, Rng& rng);

/// Gradient of the boosting surrogate F by 200-point Gauss-Legendre quadrature:
/// non-monotone weight 1/(8(1-z/2)^3) at (z/2)(x - xinf) + xinf, monotone
/// weight e^(z-1) at z x.
Vector grad_F_numeric(const Quadratic& f, const Vector& x, const Vector& xinf, Mode mode);

struct CheckResult {
  bool ok = true;
  /// Largest violation seen (0 when none).
  double worst = 0.0;
  Vector witness_x;
  Vector witness_y;
  int coordinate = -1;
  double step = 0.0;
  std::string detail;
};

/// Diminishing returns: f(x + z e_j) - f(x) >= f(y + z e_j) - f(y) for random
/// x <= y with both shifted points in [0,1]^d; the probe set also includes
/// the cube vertices pairs (0, 1 - z e_j) to expose planted violations.
CheckResult check_dr_submodular(const Quadratic& f, int trials, Rng& rng, double tol = 1e-9);
CheckResult check_nonnegative(const Quadratic& f, int trials, Rng& rng, double tol = 1e-9);
CheckResult check_monotone(const Quadratic& f, int trials, Rng& rng, double tol = 1e-9);
CheckResult check_smooth(const Quadratic& f, double beta, int trials, Rng& rng,
                         double tol = 1e-9);

}  // namespace dosm::rewards
