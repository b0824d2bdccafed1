#include "blocknorm/sampling.hpp"

#include "blocknorm/error.hpp"

namespace blocknorm {

std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Vector gaussian_vector(Rng& rng, std::size_t dim) {
  std::normal_distribution<double> gauss;
  Vector x(dim);
  for (auto& c : x) c = gauss(rng);
  return x;
}

VecSequence random_sequence(Rng& rng, const LpSpace& space, std::size_t length) {
  std::vector<Vector> entries;
  entries.reserve(length);
  for (std::size_t j = 0; j < length; ++j) entries.push_back(gaussian_vector(rng, space.dim));
  return VecSequence(space, std::move(entries));
}

std::vector<VecSequence> random_sequences(Rng& rng, const std::vector<LpSpace>& spaces,
                                          const std::vector<std::size_t>& max_lengths,
                                          std::size_t min_length) {
  if (spaces.size() != max_lengths.size()) {
    throw InputError("one maximum length per space is required");
  }
  std::vector<VecSequence> seqs;
  for (std::size_t k = 0; k < spaces.size(); ++k) {
    const std::size_t hi = std::max(max_lengths[k], min_length);
    seqs.push_back(random_sequence(rng, spaces[k], uniform_index(rng, min_length, hi)));
  }
  return seqs;
}

ScalarSequence random_scalar_sequence(Rng& rng, std::size_t length) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  ScalarSequence s(length);
  for (double& v : s) v = unit(rng);
  return s;
}

MultiOperator random_operator(Rng& rng, const std::vector<LpSpace>& domains,
                              const LpSpace& codomain) {
  std::size_t count = codomain.dim;
  for (const LpSpace& d : domains) count *= d.dim;
  std::normal_distribution<double> gauss;
  std::vector<double> coeffs(count);
  for (double& c : coeffs) c = gauss(rng);
  return MultiOperator(domains, codomain, std::move(coeffs));
}

LinearMap random_linear_map(Rng& rng, const LpSpace& domain, const LpSpace& codomain) {
  std::normal_distribution<double> gauss;
  Matrix m(codomain.dim, domain.dim);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = gauss(rng);
  }
  return LinearMap(domain, codomain, std::move(m));
}

Exponent random_exponent(Rng& rng, bool polytope_only) {
  if (polytope_only) return uniform_index(rng, 0, 1) == 0 ? Exponent(1.0) : Exponent::infinity();
  switch (uniform_index(rng, 0, 3)) {
    case 0:
      return Exponent(1.0);
    case 1:
      return Exponent(2.0);
    case 2:
      return Exponent(3.0);
    default:
      return Exponent::infinity();
  }
}

}  // namespace blocknorm
