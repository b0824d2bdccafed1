#pragma once

#include <span>
#include <vector>

#include "blocknorm/spaces.hpp"

namespace blocknorm {

/// A continuous n-linear map E_1 x ... x E_n -> F held as a dense coefficient
/// tensor of shape m_1 x ... x m_n x m_F, row-major with the codomain index
/// last.
class MultiOperator {
 public:
  MultiOperator(std::vector<LpSpace> domains, LpSpace codomain,
                std::vector<double> coefficients);

  static MultiOperator zero(std::vector<LpSpace> domains, LpSpace codomain);

  std::size_t arity() const { return domains_.size(); }
  const std::vector<LpSpace>& domains() const { return domains_; }
  const LpSpace& codomain() const { return codomain_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  /// m_1, ..., m_n, m_F.
  std::vector<std::size_t> shape() const;

  /// T(x_1, ..., x_n). Throws InputError on a slot/space mismatch.
  Vector operator()(std::span<const Vector> xs) const;
  Vector operator()(std::initializer_list<Vector> xs) const {
    return (*this)(std::span<const Vector>(xs.begin(), xs.size()));
  }

  MultiOperator scaled(double factor) const;

  /// The (n-1)-linear operator (x_2, ..., x_n) -> T(x, x_2, ..., x_n).
  /// Requires arity >= 2.
  MultiOperator curry_first(const Vector& x) const;

  /// Gradient of the form (x, psi) -> psi(T(x)) with respect to slot `slot`:
  /// the vector g with <g, y> = psi(T(x_1..y..x_n)).
  Vector slot_gradient(std::span<const Vector> xs, const Vector& psi,
                       std::size_t slot) const;

  /// The linear map y -> T(x_1, ..., x_{slot-1}, y, ...) with slot `slot` free.
  LinearMap partial_map(std::span<const Vector> xs, std::size_t slot) const;

 private:
  std::vector<LpSpace> domains_;
  LpSpace codomain_;
  std::vector<double> coefficients_;
};

/// phi_1 ⊗ ... ⊗ phi_n ⊗ b. Each functional is given by its coefficient vector
/// on the space it acts on: phi_k(x) = <phi_k.coords, x> for x ∈ phi_k.space.
MultiOperator finite_type(const std::vector<Vec>& functionals, const Vec& b);

/// Dual norm of a functional given by its coefficients on `phi.space`.
double functional_norm(const Vec& phi);

/// v ∘ T ∘ (u_1, ..., u_n).
MultiOperator compose(const LinearMap& v, const MultiOperator& t,
                      const std::vector<LinearMap>& us);

/// sup over the product of closed unit balls of ||T(x_1..x_n)||_F. Exact by
/// vertex enumeration when every domain ball is a polytope (multilinearity puts
/// the maximum at extreme points); otherwise a multi-start alternating ascent
/// where each slot update is solved in closed form by a norming vector.
/// The witness is the concatenation x_1 ‖ ... ‖ x_n.
NormResult sup_norm(const MultiOperator& t, const SearchOptions& options = {},
                    NormMethod method = NormMethod::Auto);

/// Splits a concatenated witness back into per-slot vectors.
std::vector<Vector> split_witness(const MultiOperator& t, const Vector& witness);

}  // namespace blocknorm
