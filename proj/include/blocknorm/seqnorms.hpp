#pragma once

#include <span>
#include <string>
#include <vector>

#include "blocknorm/spaces.hpp"

namespace blocknorm {

/// A sequence class: strong l_p(.), weak l_p^w(.), or the sup class
/// l_inf(.) (which also stands in for c_0(.) on finitely supported sequences).
class ClassSpec {
 public:
  enum class Kind { Strong, Weak, Sup };

  static ClassSpec strong(double p);
  static ClassSpec weak(double p);
  static ClassSpec sup();

  Kind kind() const { return kind_; }
  /// Summation exponent; +inf for Sup.
  double p() const;
  std::string to_string() const;

  friend bool operator==(const ClassSpec&, const ClassSpec&) = default;

 private:
  ClassSpec(Kind kind, double p) : kind_(kind), p_(p) {}
  Kind kind_;
  double p_;
};

/// Stack [Y_1, ..., Y_d] denoting Y_1(Y_2(...Y_d(F)...)); Y_1 is outermost.
using ClassStack = std::vector<ClassSpec>;

/// Throws UnsupportedClassPosition if a weak class sits anywhere but last.
void require_supported(const ClassStack& stack);

/// A finitely supported sequence in one space. Entries past the end are zero.
struct VecSequence {
  explicit VecSequence(LpSpace space, std::vector<Vector> entries = {});
  /// Throws InputError if the vectors do not share one space.
  static VecSequence from_vecs(const std::vector<Vec>& vecs);

  std::size_t size() const { return entries.size(); }
  VecSequence mapped(const LinearMap& u) const;
  VecSequence scaled(double factor) const;

  LpSpace space;
  std::vector<Vector> entries;
};

using ScalarSequence = std::vector<double>;

/// Norm of a sequence in the class `spec` over its space. Weak norms are exact
/// when the dual ball has enumerable extreme points (the objective is convex in
/// the functional); otherwise a seeded ascent lower bound.
NormResult class_norm(const ClassSpec& spec, const VecSequence& seq,
                      const SearchOptions& options = {},
                      NormMethod method = NormMethod::Auto);

/// Class norm of a scalar sequence. Strong and weak l_p coincide on scalars.
double scalar_class_norm(const ClassSpec& spec, std::span<const double> values);

/// A depth-d tree of vectors. Internal levels hold ordered children; the
/// innermost level (depth 1) holds a list of vectors, possibly empty.
class JaggedArray {
 public:
  static JaggedArray leaf(LpSpace space, std::vector<Vector> values);
  /// `depth` must be >= 2 and every child must have depth - 1 and `space`.
  static JaggedArray node(LpSpace space, std::size_t depth,
                          std::vector<JaggedArray> children);

  std::size_t depth() const { return depth_; }
  bool is_leaf() const { return depth_ == 1; }
  const LpSpace& space() const { return space_; }
  const std::vector<JaggedArray>& children() const { return children_; }
  const std::vector<Vector>& values() const { return values_; }

  /// Total number of stored vectors.
  std::size_t value_count() const;

 private:
  JaggedArray(LpSpace space, std::size_t depth) : space_(space), depth_(depth) {}

  LpSpace space_;
  std::size_t depth_;
  std::vector<JaggedArray> children_;
  std::vector<Vector> values_;
};

/// Iterated norm ||arr||_{Y_1(...Y_d(F)...)}. Empty leaves have norm 0.
/// Exactness flags combine by AND across the recursion.
NormResult nested_norm(const ClassStack& stack, const JaggedArray& arr,
                       const SearchOptions& options = {});

}  // namespace blocknorm
