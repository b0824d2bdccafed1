#include "blocknorm/seqnorms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blocknorm/error.hpp"
#include "blocknorm/rng.hpp"

namespace blocknorm {

ClassSpec ClassSpec::strong(double p) {
  Exponent check(p);
  (void)check;
  return ClassSpec(Kind::Strong, p);
}

ClassSpec ClassSpec::weak(double p) {
  Exponent check(p);
  (void)check;
  return ClassSpec(Kind::Weak, p);
}

ClassSpec ClassSpec::sup() { return ClassSpec(Kind::Sup, 0.0); }

double ClassSpec::p() const {
  return kind_ == Kind::Sup ? std::numeric_limits<double>::infinity() : p_;
}

std::string ClassSpec::to_string() const {
  switch (kind_) {
    case Kind::Strong:
      return "strong(" + Exponent(p_).to_string() + ")";
    case Kind::Weak:
      return "weak(" + Exponent(p_).to_string() + ")";
    case Kind::Sup:
      return "sup";
  }
  return "?";
}

void require_supported(const ClassStack& stack) {
  if (stack.empty()) throw InputError("class stack must not be empty");
  for (std::size_t i = 0; i + 1 < stack.size(); ++i) {
    if (stack[i].kind() == ClassSpec::Kind::Weak) {
      throw UnsupportedClassPosition(
          "weak class " + stack[i].to_string() + " at stack position " +
          std::to_string(i + 1) + " of " + std::to_string(stack.size()) +
          "; weak classes are only supported innermost");
    }
  }
}

VecSequence::VecSequence(LpSpace space, std::vector<Vector> entries)
    : space(space), entries(std::move(entries)) {
  for (const Vector& x : this->entries) {
    if (static_cast<std::size_t>(x.size()) != space.dim) {
      throw InputError("sequence entry of length " + std::to_string(x.size()) +
                       " does not live in " + space.to_string());
    }
  }
}

VecSequence VecSequence::from_vecs(const std::vector<Vec>& vecs) {
  if (vecs.empty()) throw InputError("cannot infer the space of an empty sequence");
  std::vector<Vector> entries;
  for (const Vec& v : vecs) {
    if (!(v.space == vecs.front().space)) {
      throw InputError("sequence mixes spaces " + vecs.front().space.to_string() +
                       " and " + v.space.to_string());
    }
    entries.push_back(v.coords);
  }
  return VecSequence(vecs.front().space, std::move(entries));
}

VecSequence VecSequence::mapped(const LinearMap& u) const {
  if (!(u.domain() == space)) {
    throw InputError("cannot map a sequence in " + space.to_string() +
                     " by a map from " + u.domain().to_string());
  }
  std::vector<Vector> out;
  out.reserve(entries.size());
  for (const Vector& x : entries) out.push_back(u(x));
  return VecSequence(u.codomain(), std::move(out));
}

VecSequence VecSequence::scaled(double factor) const {
  std::vector<Vector> out;
  out.reserve(entries.size());
  for (const Vector& x : entries) out.push_back(factor * x);
  return VecSequence(space, std::move(out));
}

double scalar_class_norm(const ClassSpec& spec, std::span<const double> values) {
  Vector v = Eigen::Map<const Vector>(values.data(),
                                      static_cast<Eigen::Index>(values.size()));
  if (spec.kind() == ClassSpec::Kind::Sup) return lp_norm(v, Exponent::infinity());
  return lp_norm(v, Exponent(spec.p()));
}

namespace {

Matrix as_columns(const VecSequence& seq) {
  Matrix m(seq.space.dim, seq.entries.size());
  for (std::size_t j = 0; j < seq.entries.size(); ++j) m.col(j) = seq.entries[j];
  return m;
}

constexpr int kMaxWeakSteps = 300;
constexpr std::size_t kMaxEntryStarts = 16;

// Power-type ascent on phi -> sum_j |phi(x_j)|^p over the dual ball. The
// objective is convex, so maximizing its linearization never decreases it.
NormResult weak_ascent(const Matrix& cols, const Exponent& p,
                       const Exponent& dual_exp, Vector phi) {
  double value = lp_norm(cols.transpose() * phi, p);
  const double pv = p.value();
  for (int step = 0; step < kMaxWeakSteps; ++step) {
    const Vector vals = cols.transpose() * phi;
    Vector weights(vals.size());
    for (Eigen::Index j = 0; j < vals.size(); ++j) {
      const double a = std::abs(vals[j]);
      const double mag = pv == 1.0 ? 1.0 : std::pow(a, pv - 1.0);
      weights[j] = vals[j] < 0.0 ? -mag : mag;
    }
    const Vector next = norming_vector(cols * weights, dual_exp);
    const double next_value = lp_norm(cols.transpose() * next, p);
    if (!(next_value > value * (1.0 + 1e-15))) break;
    phi = next;
    value = next_value;
  }
  return {value, false, phi};
}

NormResult weak_norm(const ClassSpec& spec, const VecSequence& seq,
                     const SearchOptions& options, NormMethod method) {
  const Exponent p(spec.p());
  const Matrix cols = as_columns(seq);
  if (method == NormMethod::Auto) {
    if (auto functionals = dual_ball_extreme_points(seq.space, true)) {
      NormResult best{0.0, true, (*functionals)[0]};
      for (const Vector& phi : *functionals) {
        const double v = lp_norm(cols.transpose() * phi, p);
        if (v > best.value) best = {v, true, phi};
      }
      return best;
    }
  }

  const Exponent dual_exp = dual_exponent(seq.space.exp);
  NormResult best{0.0, false, Vector::Zero(seq.space.dim)};
  best.witness[0] = 1.0;
  auto consider = [&](NormResult r) {
    if (r.value > best.value) best = std::move(r);
  };
  for (std::size_t j = 0; j < std::min(seq.entries.size(), kMaxEntryStarts); ++j) {
    consider(weak_ascent(cols, p, dual_exp, norming_vector(seq.entries[j], dual_exp)));
  }
  for (std::size_t r = 0; r < options.budget; ++r) {
    Rng rng(derive_seed(options.seed, {r}));
    std::normal_distribution<double> gauss;
    Vector phi(seq.space.dim);
    for (auto& c : phi) c = gauss(rng);
    const double n = lp_norm(phi, dual_exp);
    if (n == 0.0) continue;
    consider(weak_ascent(cols, p, dual_exp, phi / n));
  }
  best.exact = false;
  return best;
}

}  // namespace

NormResult class_norm(const ClassSpec& spec, const VecSequence& seq,
                      const SearchOptions& options, NormMethod method) {
  if (seq.entries.empty()) return {0.0, true, Vector()};
  if (spec.kind() == ClassSpec::Kind::Weak) return weak_norm(spec, seq, options, method);
  Vector norms(seq.entries.size());
  for (std::size_t j = 0; j < seq.entries.size(); ++j) {
    norms[j] = lp_norm(seq.entries[j], seq.space.exp);
  }
  const Exponent outer = spec.kind() == ClassSpec::Kind::Sup ? Exponent::infinity()
                                                              : Exponent(spec.p());
  return {lp_norm(norms, outer), true, Vector()};
}

JaggedArray JaggedArray::leaf(LpSpace space, std::vector<Vector> values) {
  for (const Vector& v : values) {
    if (static_cast<std::size_t>(v.size()) != space.dim) {
      throw InputError("jagged array leaf entry does not live in " + space.to_string());
    }
  }
  JaggedArray arr(space, 1);
  arr.values_ = std::move(values);
  return arr;
}

JaggedArray JaggedArray::node(LpSpace space, std::size_t depth,
                              std::vector<JaggedArray> children) {
  if (depth < 2) throw InputError("internal jagged array node needs depth >= 2");
  for (const JaggedArray& c : children) {
    if (c.depth() != depth - 1 || !(c.space() == space)) {
      throw InputError("jagged array children must share depth and space");
    }
  }
  JaggedArray arr(space, depth);
  arr.children_ = std::move(children);
  return arr;
}

std::size_t JaggedArray::value_count() const {
  if (is_leaf()) return values_.size();
  std::size_t total = 0;
  for (const JaggedArray& c : children_) total += c.value_count();
  return total;
}

namespace {

NormResult nested_norm_at(std::span<const ClassSpec> stack, const JaggedArray& arr,
                          const SearchOptions& options) {
  if (arr.is_leaf()) {
    return class_norm(stack.front(), VecSequence(arr.space(), arr.values()), options);
  }
  bool exact = true;
  std::vector<double> child_values;
  child_values.reserve(arr.children().size());
  for (std::size_t i = 0; i < arr.children().size(); ++i) {
    const SearchOptions child_options{options.budget, derive_seed(options.seed, {i})};
    const NormResult r = nested_norm_at(stack.subspan(1), arr.children()[i], child_options);
    exact = exact && r.exact;
    child_values.push_back(r.value);
  }
  return {scalar_class_norm(stack.front(), child_values), exact, Vector()};
}

}  // namespace

NormResult nested_norm(const ClassStack& stack, const JaggedArray& arr,
                       const SearchOptions& options) {
  require_supported(stack);
  if (stack.size() != arr.depth()) {
    throw InputError("class stack has " + std::to_string(stack.size()) +
                     " levels but the array has depth " + std::to_string(arr.depth()));
  }
  return nested_norm_at(stack, arr, options);
}

}  // namespace blocknorm
