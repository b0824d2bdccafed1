#pragma once

#include <vector>

#include "blocknorm/multilinear.hpp"
#include "blocknorm/rng.hpp"
#include "blocknorm/seqnorms.hpp"

namespace blocknorm {

// Seeded random instances for the property suites and the CLI.

Vector gaussian_vector(Rng& rng, std::size_t dim);

VecSequence random_sequence(Rng& rng, const LpSpace& space, std::size_t length);

/// One sequence per space, lengths uniform in [min_length, max_lengths[k]].
std::vector<VecSequence> random_sequences(Rng& rng, const std::vector<LpSpace>& spaces,
                                          const std::vector<std::size_t>& max_lengths,
                                          std::size_t min_length = 1);

/// Entries uniform in [-1, 1].
ScalarSequence random_scalar_sequence(Rng& rng, std::size_t length);

MultiOperator random_operator(Rng& rng, const std::vector<LpSpace>& domains,
                              const LpSpace& codomain);

LinearMap random_linear_map(Rng& rng, const LpSpace& domain, const LpSpace& codomain);

/// Uniform choice among 1, 2, 3 and inf, or among 1 and inf for polytope balls.
Exponent random_exponent(Rng& rng, bool polytope_only = false);

std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi);

}  // namespace blocknorm
