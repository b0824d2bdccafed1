#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "blocknorm/blocks.hpp"
#include "blocknorm/multilinear.hpp"
#include "blocknorm/seqnorms.hpp"

namespace blocknorm {

/// The block image T̂_B(x^(1), ..., x^(n)): a depth-n array whose branch
/// (j_1, ..., j_{n-1}) holds [T(x^(1)_{j_1}, ..., x^(n)_{j_n}) : j_n ∈ B^{j_1..j_{n-1}}].
/// Branches run over the full block bounds; sequence entries past a
/// sequence's end are zero. Throws InputError when a sequence is longer than
/// the block bound of its slot or lives in the wrong space.
JaggedArray block_image(const MultiOperator& t, const Block& b,
                        const std::vector<VecSequence>& seqs);

/// ||T̂_B(seqs)|| in Y_1(...Y_n(F)...). Evaluated level by level without
/// materializing the image; agrees with nested_norm(stack, block_image(...)).
NormResult block_value(const MultiOperator& t, const Block& b, const ClassStack& stack,
                       const std::vector<VecSequence>& seqs,
                       const SearchOptions& options = {});

/// Single-point sequences x^(k) · e_{position[k]}.
std::vector<VecSequence> single_point_sequences(const MultiOperator& t,
                                                const std::vector<Vector>& xs,
                                                const IndexTuple& position);

struct SummingEstimate {
  /// Lower bound on ||T||_{B; X_1..X_n; Y_1..Y_n} at the truncation.
  double value = 0.0;
  /// Sequences attaining `value`, each normalized to X_k-norm 1.
  std::vector<VecSequence> witness;
  /// True when every norm evaluated along the way was exact, which makes
  /// `value` a certified lower bound.
  bool exact = true;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  std::size_t truncation = 0;
  /// "single-point", "vertex-constant" or "random-restart".
  std::string family;
  std::size_t evaluations = 0;
};

/// Lower-bound estimate of sup{ ||T̂_B(seqs)|| : ||seq_k||_{X_k} <= 1,
/// length(seq_k) <= min(k, bound_k) }.
///
/// Three candidate families are searched and the best ratio
/// ||T̂_B(seqs)|| / prod ||seq_k||_{X_k} is kept:
///  1. single-point sequences at a maximizer of ||T(x)|| and the first member
///     of B; these always realize ||T|| (this family ignores `k`);
///  2. constant sequences (v, ..., v) built from unit-ball vertices;
///  3. seeded Gaussian restarts refined by coordinate hill-climbing.
/// Families 2 and 3 form one fixed stream of candidates that `budget`
/// truncates, and candidates longer than `k` are skipped in place, so the
/// value is nondecreasing in both `budget` and `k`.
SummingEstimate summing_norm(const MultiOperator& t, const Block& b,
                             const std::vector<ClassSpec>& xspecs,
                             const ClassStack& stack, std::size_t k,
                             const SearchOptions& options = {});

/// The scalar n-linear form (l_1, ..., l_n) -> l_1 ... l_n on R^n.
MultiOperator scalar_product_form(std::size_t n);

struct CompatReport {
  bool pass = true;
  /// max over samples of ||block products||_{Y} - prod ||l^(k)||_{X_k}.
  double worst_margin = -std::numeric_limits<double>::infinity();
  /// Scalar sequences attaining the worst margin.
  std::vector<ScalarSequence> witness;
  std::size_t samples = 0;
};

/// Block compatibility of (X_1..X_n, Y_1..Y_n) on sampled scalar sequences.
/// Each sample is a tuple of n scalar sequences, each no longer than the
/// corresponding block bound.
CompatReport check_compatibility(const std::vector<ClassSpec>& xspecs,
                                 const ClassStack& stack, const Block& b,
                                 const std::vector<std::vector<ScalarSequence>>& samples,
                                 double tolerance = 1e-12);

/// Compatibility margin of one tuple of scalar sequences.
double compatibility_margin(const std::vector<ClassSpec>& xspecs, const ClassStack& stack,
                            const Block& b, const std::vector<ScalarSequence>& lambdas);

struct DiagonalizabilityReport {
  bool pass = true;
  double worst_deviation = 0.0;
  std::size_t samples = 0;
  bool exact = true;
};

/// Checks ||(y_j · e_j)_j||_{Y(Z(F))} == ||(y_j)_j||_{Y(F)} on samples.
DiagonalizabilityReport check_diagonalizable(const ClassSpec& y, const ClassSpec& z,
                                             const LpSpace& space,
                                             const std::vector<VecSequence>& samples,
                                             const SearchOptions& options = {},
                                             double tolerance = 1e-12);

}  // namespace blocknorm
