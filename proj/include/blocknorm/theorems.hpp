#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blocknorm/serialize.hpp"
#include "blocknorm/summing.hpp"

namespace blocknorm {

struct Tolerances {
  /// Relative tolerance for exact arithmetic identities.
  double identity = 1e-12;
  /// Absolute slack allowed in inequality chains with float accumulation.
  double chain = 1e-9;
};

/// One asserted relation within a check, aggregated over instances.
struct Assertion {
  std::string name;
  /// "identity" (slack = |LHS - RHS|, relative tolerance) or
  /// "inequality" (slack = LHS - RHS, absolute tolerance).
  std::string relation;
  double tolerance = 0.0;
  bool pass = true;
  double worst_slack = -std::numeric_limits<double>::infinity();
  std::size_t evaluated = 0;
  /// Inputs, LHS and RHS of the instance with the worst slack.
  json witness;
};

struct CheckReport {
  std::string name;
  std::size_t instances = 0;
  bool pass = true;
  bool skipped = false;
  std::vector<Assertion> assertions;
  std::vector<std::string> diagnostics;

  double worst_slack() const;
  /// Appends the assertions of `other`, merging by name.
  void merge(const CheckReport& other);
};

json to_json(const CheckReport& report);
json to_json(const CompatReport& report);

/// Single-point realization: for each x-tuple and each member of B, the block
/// value at the sequences x_k · e_{j_k} equals ||T(x)||. Also asserts
/// sup_norm(T) <= summing_norm(T) at truncation k.
CheckReport check_norm_domination(const MultiOperator& t, const Block& b,
                                  const std::vector<ClassSpec>& xspecs,
                                  const ClassStack& stack,
                                  const std::vector<std::vector<Vector>>& points,
                                  std::size_t k, const SearchOptions& options = {},
                                  const Tolerances& tol = {});

/// Pointwise ideal inequalities for v ∘ T ∘ (u_1..u_n):
///  (i)  ||(v T (u x))^_B|| <= ||v|| ||T^_B(u x)||,
///  (ii) ||(u_k x_j)_j||_{X_k} <= ||u_k|| ||(x_j)_j||_{X_k}.
/// Sequences in each sample live in the domains of the u_k.
CheckReport check_ideal_inequality(const LinearMap& v, const MultiOperator& t,
                                   const std::vector<LinearMap>& us, const Block& b,
                                   const std::vector<ClassSpec>& xspecs,
                                   const ClassStack& stack,
                                   const std::vector<std::vector<VecSequence>>& samples,
                                   const SearchOptions& options = {},
                                   const Tolerances& tol = {});

/// summing_norm(phi_1 ⊗ ... ⊗ phi_n ⊗ b) == ||b|| prod ||phi_k||. Compatibility
/// of the classes is sampled first; an incompatible setting skips the check.
CheckReport check_finite_type_norm(const std::vector<Vec>& functionals, const Vec& b,
                                   const Block& block, const std::vector<ClassSpec>& xspecs,
                                   const ClassStack& stack, std::size_t k,
                                   const SearchOptions& options = {},
                                   const Tolerances& tol = {});

/// Diagonal block, stack [strong(q), z, ..., z]: the block value equals
/// (sum_j ||T(x^(1)_j, ..., x^(n)_j)||^q)^{1/q}.
CheckReport check_diagonal_reduction(const MultiOperator& t, double q, const ClassSpec& z,
                                     const std::vector<std::vector<VecSequence>>& samples,
                                     const Tolerances& tol = {});

/// Full block, stack [strong(q_1), ..., strong(q_n)]: the block value equals
/// the iterated sum over j_1, ..., j_n.
CheckReport check_multiple_formula(const MultiOperator& t, const std::vector<double>& qs,
                                   const std::vector<std::vector<VecSequence>>& samples,
                                   const Tolerances& tol = {});

/// The stack [strong(q1), sup, strong(q2)] whose value on Equality(1,2) is the
/// double sum below. Any class works in the middle, since every second-level
/// array has at most one nonzero entry.
ClassStack partition_stack(double q1, double q2);

/// Trilinear T, block Equality(1,2): the block value with `stack` equals
/// (sum_{j1} (sum_{j2} ||T(x_{j1}, y_{j1}, z_{j2})||^{q2})^{q1/q2})^{1/q1}.
CheckReport check_partition_formula(const MultiOperator& t, const ClassStack& stack,
                                    double q1, double q2,
                                    const std::vector<std::vector<VecSequence>>& samples,
                                    const Tolerances& tol = {});

struct CoincidenceConstants {
  double c1 = 1.0;
  double c2 = 1.0;
};

/// Bilinear coincidence on the Full block with stack [strong(q), strong(q)]:
///  (i)  the rows (A(x_{j1}, y_{j2}))_{j2} obtained from the curried linear
///       maps y -> A(x_{j1}, y) match block_image exactly;
///  (ii) block value <= C1 C2 ||A|| prod ||seq_k||_{X_k}.
/// Without constants only the regime X = (strong(1), strong(1)), q = 1 is
/// accepted, where C1 = C2 = 1; anything else throws InputError.
CheckReport check_coincidence(const MultiOperator& a, const std::vector<ClassSpec>& xspecs,
                              double q, std::optional<CoincidenceConstants> constants,
                              const std::vector<std::vector<VecSequence>>& samples,
                              const SearchOptions& options = {},
                              const Tolerances& tol = {});

/// Searches scalar sequences of length <= min(k, bound) for a positive
/// compatibility margin. Margins are computed on X-normalized sequences, so
/// the witness has unit X-norms and margin = block norm - 1.
CompatReport find_incompatibility_witness(const std::vector<ClassSpec>& xspecs,
                                          const ClassStack& stack, const Block& b,
                                          std::size_t k, const SearchOptions& options = {},
                                          double tolerance = 1e-12);

}  // namespace blocknorm
