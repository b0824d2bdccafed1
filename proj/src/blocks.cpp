#include "blocknorm/blocks.hpp"

#include <algorithm>

#include "blocknorm/error.hpp"

namespace blocknorm {

namespace {

void check_bounds(const std::vector<std::size_t>& bounds) {
  if (bounds.empty()) throw InputError("block arity must be at least 1");
  for (std::size_t k : bounds) {
    if (k == 0) throw InputError("block bounds must be positive");
  }
}

std::string tuple_string(std::span<const std::size_t> t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(t[i]);
  }
  return s + ")";
}

// Enumerates [k_1] x ... x [k_n] in lexicographic order.
template <typename Visit>
void for_each_tuple(const std::vector<std::size_t>& bounds, Visit visit) {
  IndexTuple t(bounds.size(), 0);
  while (true) {
    visit(t);
    std::size_t i = bounds.size();
    while (i > 0) {
      --i;
      if (++t[i] < bounds[i]) break;
      t[i] = 0;
      if (i == 0) return;
    }
  }
}

}  // namespace

Block::Block(BlockKind kind, std::vector<std::size_t> bounds,
             std::vector<IndexTuple> members)
    : kind_(kind), bounds_(std::move(bounds)), members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (members_.empty()) throw NonvoidViolation("block is empty");
}

Block Block::diagonal(std::vector<std::size_t> bounds) {
  check_bounds(bounds);
  const std::size_t k = *std::min_element(bounds.begin(), bounds.end());
  std::vector<IndexTuple> members;
  for (std::size_t j = 0; j < k; ++j) members.emplace_back(bounds.size(), j);
  return Block(BlockKind::Diagonal, std::move(bounds), std::move(members));
}

Block Block::full(std::vector<std::size_t> bounds) {
  check_bounds(bounds);
  std::vector<IndexTuple> members;
  for_each_tuple(bounds, [&](const IndexTuple& t) { members.push_back(t); });
  return Block(BlockKind::Full, std::move(bounds), std::move(members));
}

Block Block::equality(std::size_t first, std::size_t second,
                      std::vector<std::size_t> bounds) {
  check_bounds(bounds);
  if (first >= bounds.size() || second >= bounds.size() || first == second) {
    throw InputError("equality block needs two distinct positions below the arity");
  }
  std::vector<IndexTuple> members;
  for_each_tuple(bounds, [&](const IndexTuple& t) {
    if (t[first] == t[second]) members.push_back(t);
  });
  Block b(BlockKind::Equality, std::move(bounds), std::move(members));
  b.equal_ = {std::min(first, second), std::max(first, second)};
  return b;
}

Block Block::explicit_set(std::vector<std::size_t> bounds,
                          std::vector<IndexTuple> members) {
  check_bounds(bounds);
  for (const IndexTuple& t : members) {
    if (t.size() != bounds.size()) {
      throw InputError("block tuple " + tuple_string(t) + " has arity " +
                       std::to_string(t.size()) + ", expected " +
                       std::to_string(bounds.size()));
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] >= bounds[i]) {
        throw InputError("block tuple " + tuple_string(t) + " is out of bounds");
      }
    }
  }
  return Block(BlockKind::Explicit, std::move(bounds), std::move(members));
}

bool Block::contains(std::span<const std::size_t> tuple) const {
  return std::binary_search(
      members_.begin(), members_.end(), tuple,
      [](const auto& a, const auto& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
      });
}

std::vector<std::size_t> Block::fiber(std::span<const std::size_t> prefix) const {
  if (prefix.size() + 1 != arity()) {
    throw InputError("fiber prefix has length " + std::to_string(prefix.size()) +
                     ", expected " + std::to_string(arity() - 1));
  }
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (prefix[i] >= bounds_[i]) {
      throw InputError("fiber prefix " + tuple_string(prefix) + " is out of bounds");
    }
  }
  // Members are sorted, so those extending `prefix` form one contiguous run.
  auto less_prefix = [&](const IndexTuple& m, std::span<const std::size_t> p) {
    return std::lexicographical_compare(m.begin(), m.begin() + p.size(), p.begin(),
                                        p.end());
  };
  auto first = std::lower_bound(members_.begin(), members_.end(), prefix, less_prefix);
  std::vector<std::size_t> out;
  for (auto it = first; it != members_.end(); ++it) {
    if (!std::equal(prefix.begin(), prefix.end(), it->begin())) break;
    out.push_back(it->back());
  }
  return out;
}

std::string Block::describe() const {
  std::string name;
  switch (kind_) {
    case BlockKind::Diagonal:
      name = "diagonal";
      break;
    case BlockKind::Full:
      name = "full";
      break;
    case BlockKind::Equality:
      name = "equality(" + std::to_string(equal_.first) + "," +
             std::to_string(equal_.second) + ")";
      break;
    case BlockKind::Explicit:
      name = "explicit";
      break;
  }
  return name + tuple_string(bounds_);
}

}  // namespace blocknorm
