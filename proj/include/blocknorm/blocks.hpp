#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace blocknorm {

/// An index tuple (j_1, ..., j_n). Indices are 0-based throughout the C++ API.
using IndexTuple = std::vector<std::size_t>;

enum class BlockKind { Diagonal, Full, Equality, Explicit };

/// A nonvoid finite block B ⊆ [k_1] x ... x [k_n], stored as a sorted set of
/// member tuples.
class Block {
 public:
  /// {(j, ..., j) : j < min k_i}.
  static Block diagonal(std::vector<std::size_t> bounds);
  /// [k_1] x ... x [k_n].
  static Block full(std::vector<std::size_t> bounds);
  /// {t : t[first] == t[second]}, positions 0-based.
  static Block equality(std::size_t first, std::size_t second,
                        std::vector<std::size_t> bounds);
  /// Caller-supplied members; duplicates are merged. Throws InputError for a
  /// tuple outside the bounds.
  static Block explicit_set(std::vector<std::size_t> bounds,
                            std::vector<IndexTuple> members);

  BlockKind kind() const { return kind_; }
  std::size_t arity() const { return bounds_.size(); }
  const std::vector<std::size_t>& bounds() const { return bounds_; }
  const std::vector<IndexTuple>& members() const { return members_; }
  /// For Equality blocks, the constrained positions.
  std::pair<std::size_t, std::size_t> equality_positions() const { return equal_; }

  bool contains(std::span<const std::size_t> tuple) const;

  /// B^{prefix} = {j_n : (prefix, j_n) ∈ B}, ascending. `prefix` has arity-1
  /// entries, each within bounds; the empty prefix of a 1-block gives B.
  std::vector<std::size_t> fiber(std::span<const std::size_t> prefix) const;

  std::string describe() const;

 private:
  Block(BlockKind kind, std::vector<std::size_t> bounds, std::vector<IndexTuple> members);

  BlockKind kind_;
  std::vector<std::size_t> bounds_;
  std::vector<IndexTuple> members_;
  std::pair<std::size_t, std::size_t> equal_{0, 0};
};

}  // namespace blocknorm
