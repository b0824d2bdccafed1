#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace blocknorm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// An exponent in [1, inf]. Infinity is a separate state, never a float
/// sentinel, so duality stays total: dual(1) == inf and dual(inf) == 1.
class Exponent {
 public:
  /// Throws InputError unless `p` is finite and >= 1.
  explicit Exponent(double p);

  static Exponent infinity();

  bool is_infinite() const { return infinite_; }
  bool is_one() const { return !infinite_ && value_ == 1.0; }
  /// +inf for the infinite exponent.
  double value() const;
  std::string to_string() const;

  friend bool operator==(const Exponent&, const Exponent&) = default;

 private:
  Exponent() = default;
  bool infinite_ = false;
  double value_ = 1.0;
};

/// The conjugate exponent p' with 1/p + 1/p' = 1.
Exponent dual_exponent(Exponent p);

/// R^dim with the l_p norm.
struct LpSpace {
  LpSpace(std::size_t dim, Exponent exp);

  std::size_t dim;
  Exponent exp;

  LpSpace dual() const { return LpSpace(dim, dual_exponent(exp)); }
  std::string to_string() const;

  friend bool operator==(const LpSpace&, const LpSpace&) = default;
};

/// A vector tagged with the space it lives in.
struct Vec {
  Vec(LpSpace space, Vector coords);

  LpSpace space;
  Vector coords;
};

double lp_norm(const Vector& x, Exponent p);
double vec_norm(const Vec& x);

/// Extreme points of the closed unit ball of `space` when it is a polytope
/// (p in {1, inf}, or dim 1). With `up_to_sign`, one point per +/- pair.
std::optional<std::vector<Vector>> ball_extreme_points(const LpSpace& space,
                                                       bool up_to_sign = false);

/// Extreme points of the dual unit ball: 2^m sign vectors for p = 1,
/// the 2m vectors +/-e_i for p = inf, nothing otherwise.
std::optional<std::vector<Vector>> dual_ball_extreme_points(
    const LpSpace& space, bool up_to_sign = false);

/// A unit vector x in l_p maximizing <g, x>; the value attained is
/// ||g||_{p'}. Returns e_1 for g == 0.
Vector norming_vector(const Vector& g, Exponent p);

struct SearchOptions {
  /// Number of seeded random restarts for stochastic searches.
  std::size_t budget = 32;
  std::uint64_t seed = 0;
};

/// Value of a norm or supremum. `exact` is false when the value is only a
/// lower bound from seeded ascent.
struct NormResult {
  double value = 0.0;
  bool exact = true;
  /// Point attaining `value`, when the computation has one.
  Vector witness;
};

class LinearMap {
 public:
  LinearMap(LpSpace domain, LpSpace codomain, Matrix matrix);

  static LinearMap identity(const LpSpace& space);

  const LpSpace& domain() const { return domain_; }
  const LpSpace& codomain() const { return codomain_; }
  const Matrix& matrix() const { return matrix_; }

  Vector operator()(const Vector& x) const;
  /// v ∘ this.
  LinearMap then(const LinearMap& v) const;

 private:
  LpSpace domain_;
  LpSpace codomain_;
  Matrix matrix_;
};

enum class NormMethod { Auto, Ascent };

/// Operator norm sup_{||x|| <= 1} ||u x||. Exact by vertex enumeration when
/// the domain ball is a polytope; otherwise a multi-start alternating ascent
/// lower bound. `NormMethod::Ascent` forces the ascent path.
NormResult linear_map_norm(const LinearMap& u, const SearchOptions& options = {},
                           NormMethod method = NormMethod::Auto);

}  // namespace blocknorm
