#include "blocknorm/summing.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "blocknorm/error.hpp"
#include "blocknorm/rng.hpp"

namespace blocknorm {

namespace {

void validate_sequences(const MultiOperator& t, const Block& b,
                        const std::vector<VecSequence>& seqs) {
  if (b.arity() != t.arity()) {
    throw InputError("block arity " + std::to_string(b.arity()) +
                     " does not match operator arity " + std::to_string(t.arity()));
  }
  if (seqs.size() != t.arity()) {
    throw InputError("expected " + std::to_string(t.arity()) + " sequences, got " +
                     std::to_string(seqs.size()));
  }
  for (std::size_t k = 0; k < seqs.size(); ++k) {
    if (!(seqs[k].space == t.domains()[k])) {
      throw InputError("sequence " + std::to_string(k + 1) + " lives in " +
                       seqs[k].space.to_string() + ", slot expects " +
                       t.domains()[k].to_string());
    }
    if (seqs[k].size() > b.bounds()[k]) {
      throw InputError("sequence " + std::to_string(k + 1) + " has length " +
                       std::to_string(seqs[k].size()) + " beyond the block bound " +
                       std::to_string(b.bounds()[k]));
    }
  }
}

// Walks the block image level by level. `op` is T with the first `level`
// slots already fixed; nullopt means some fixed entry was past the end of its
// sequence, so every value below is zero.
class ImageWalker {
 public:
  ImageWalker(const MultiOperator& t, const Block& b, const std::vector<VecSequence>& seqs)
      : t_(t), b_(b), seqs_(seqs) {}

  JaggedArray image(std::size_t level, std::vector<std::size_t>& prefix,
                    const std::optional<MultiOperator>& op) const {
    if (level + 1 == t_.arity()) {
      return JaggedArray::leaf(t_.codomain(), leaf_values(prefix, op));
    }
    std::vector<JaggedArray> children;
    for (std::size_t j = 0; j < b_.bounds()[level]; ++j) {
      prefix.push_back(j);
      children.push_back(image(level + 1, prefix, fix(op, level, j)));
      prefix.pop_back();
    }
    return JaggedArray::node(t_.codomain(), t_.arity() - level, std::move(children));
  }

  NormResult value(std::size_t level, std::vector<std::size_t>& prefix,
                   const std::optional<MultiOperator>& op, const ClassStack& stack,
                   const SearchOptions& options) const {
    if (!op) return {0.0, true, Vector()};
    if (level + 1 == t_.arity()) {
      return class_norm(stack[level], VecSequence(t_.codomain(), leaf_values(prefix, op)),
                        options);
    }
    bool exact = true;
    std::vector<double> child_values;
    child_values.reserve(b_.bounds()[level]);
    for (std::size_t j = 0; j < b_.bounds()[level]; ++j) {
      prefix.push_back(j);
      const SearchOptions child{options.budget, derive_seed(options.seed, {j})};
      const NormResult r = value(level + 1, prefix, fix(op, level, j), stack, child);
      prefix.pop_back();
      exact = exact && r.exact;
      child_values.push_back(r.value);
    }
    return {scalar_class_norm(stack[level], child_values), exact, Vector()};
  }

 private:
  std::optional<MultiOperator> fix(const std::optional<MultiOperator>& op,
                                   std::size_t level, std::size_t j) const {
    if (!op || j >= seqs_[level].size()) return std::nullopt;
    return op->curry_first(seqs_[level].entries[j]);
  }

  std::vector<Vector> leaf_values(const std::vector<std::size_t>& prefix,
                                  const std::optional<MultiOperator>& op) const {
    const std::size_t last = t_.arity() - 1;
    std::vector<Vector> values;
    for (std::size_t j : b_.fiber(prefix)) {
      if (!op || j >= seqs_[last].size()) {
        values.push_back(Vector::Zero(t_.codomain().dim));
      } else {
        values.push_back((*op)({seqs_[last].entries[j]}));
      }
    }
    return values;
  }

  const MultiOperator& t_;
  const Block& b_;
  const std::vector<VecSequence>& seqs_;
};

}  // namespace

JaggedArray block_image(const MultiOperator& t, const Block& b,
                        const std::vector<VecSequence>& seqs) {
  validate_sequences(t, b, seqs);
  std::vector<std::size_t> prefix;
  return ImageWalker(t, b, seqs).image(0, prefix, t);
}

NormResult block_value(const MultiOperator& t, const Block& b, const ClassStack& stack,
                       const std::vector<VecSequence>& seqs, const SearchOptions& options) {
  validate_sequences(t, b, seqs);
  require_supported(stack);
  if (stack.size() != t.arity()) {
    throw InputError("class stack has " + std::to_string(stack.size()) +
                     " levels, operator arity is " + std::to_string(t.arity()));
  }
  std::vector<std::size_t> prefix;
  return ImageWalker(t, b, seqs).value(0, prefix, t, stack, options);
}

std::vector<VecSequence> single_point_sequences(const MultiOperator& t,
                                                const std::vector<Vector>& xs,
                                                const IndexTuple& position) {
  if (xs.size() != t.arity() || position.size() != t.arity()) {
    throw InputError("single-point sequences need one point and one position per slot");
  }
  std::vector<VecSequence> seqs;
  for (std::size_t k = 0; k < t.arity(); ++k) {
    std::vector<Vector> entries(position[k] + 1, Vector::Zero(t.domains()[k].dim));
    entries[position[k]] = xs[k];
    seqs.emplace_back(t.domains()[k], std::move(entries));
  }
  return seqs;
}

namespace {

constexpr std::size_t kMaxVertexCandidates = 4096;
constexpr int kHillSteps = 30;

enum Stream : std::uint64_t { kSupStream = 1, kRestartStream = 2, kNormStream = 3 };

std::vector<double> encode(const std::vector<VecSequence>& seqs) {
  std::vector<double> code;
  for (const VecSequence& s : seqs) {
    code.push_back(static_cast<double>(s.size()));
    for (const Vector& x : s.entries) code.insert(code.end(), x.begin(), x.end());
  }
  return code;
}

class Search {
 public:
  Search(const MultiOperator& t, const Block& b, const std::vector<ClassSpec>& xspecs,
         const ClassStack& stack, const SearchOptions& options)
      : t_(t),
        b_(b),
        xspecs_(xspecs),
        stack_(stack),
        norm_options_{options.budget, derive_seed(options.seed, {kNormStream})} {}

  // Ratio ||T̂_B(seqs)|| / prod ||seq_k||_{X_k}; nullopt if a sequence is zero.
  std::optional<double> ratio(const std::vector<VecSequence>& seqs) {
    ++evaluations_;
    double denom = 1.0;
    for (std::size_t k = 0; k < seqs.size(); ++k) {
      const NormResult n = class_norm(xspecs_[k], seqs[k], norm_options_);
      exact_ = exact_ && n.exact;
      if (n.value == 0.0) return std::nullopt;
      denom *= n.value;
    }
    const NormResult v = block_value(t_, b_, stack_, seqs, norm_options_);
    exact_ = exact_ && v.exact;
    return v.value / denom;
  }

  void offer(const std::vector<VecSequence>& seqs, double r, const char* family) {
    if (r > best_ratio_ ||
        (r == best_ratio_ && !best_.empty() && encode(seqs) < encode(best_))) {
      best_ratio_ = r;
      best_ = seqs;
      family_ = family;
    }
  }

  void evaluate(const std::vector<VecSequence>& seqs, const char* family) {
    if (auto r = ratio(seqs)) offer(seqs, *r, family);
  }

  // Coordinate hill-climbing from `seqs`; only improving moves are kept.
  void climb(std::vector<VecSequence> seqs, Rng& rng) {
    auto start = ratio(seqs);
    if (!start) return;
    double current = *start;
    double step = 0.5;
    for (int h = 0; h < kHillSteps; ++h) {
      const std::size_t s = std::uniform_int_distribution<std::size_t>(0, seqs.size() - 1)(rng);
      const std::size_t len = seqs[s].size();
      const std::size_t j = std::uniform_int_distribution<std::size_t>(0, len - 1)(rng);
      const std::size_t dim = seqs[s].space.dim;
      const std::size_t i = std::uniform_int_distribution<std::size_t>(0, dim - 1)(rng);
      const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
      double scale = 0.0;
      for (const Vector& x : seqs[s].entries) scale = std::max(scale, x.cwiseAbs().maxCoeff());
      std::vector<VecSequence> trial = seqs;
      trial[s].entries[j][i] += sign * step * scale;
      const auto r = ratio(trial);
      if (r && *r > current) {
        current = *r;
        seqs = std::move(trial);
      } else {
        step *= 0.8;
      }
    }
    offer(seqs, current, "random-restart");
  }

  double best_ratio() const { return best_ratio_; }
  const std::vector<VecSequence>& best() const { return best_; }
  const std::string& family() const { return family_; }
  bool exact() const { return exact_; }
  std::size_t evaluations() const { return evaluations_; }
  const SearchOptions& norm_options() const { return norm_options_; }

 private:
  const MultiOperator& t_;
  const Block& b_;
  const std::vector<ClassSpec>& xspecs_;
  const ClassStack& stack_;
  SearchOptions norm_options_;
  double best_ratio_ = -1.0;
  std::vector<VecSequence> best_;
  std::string family_;
  bool exact_ = true;
  std::size_t evaluations_ = 0;
};

std::vector<Vector> vertex_representatives(const LpSpace& space) {
  if (auto v = ball_extreme_points(space, true)) return *v;
  std::vector<Vector> points;
  for (std::size_t i = 0; i < space.dim; ++i) {
    Vector e = Vector::Zero(space.dim);
    e[i] = 1.0;
    points.push_back(e);
  }
  Vector ones = Vector::Ones(space.dim);
  points.push_back(ones / lp_norm(ones, space.exp));
  return points;
}

}  // namespace

SummingEstimate summing_norm(const MultiOperator& t, const Block& b,
                             const std::vector<ClassSpec>& xspecs,
                             const ClassStack& stack, std::size_t k,
                             const SearchOptions& options) {
  const std::size_t n = t.arity();
  if (xspecs.size() != n || stack.size() != n || b.arity() != n) {
    throw InputError("summing_norm needs one X class, one Y class and one block "
                     "coordinate per operator slot");
  }
  require_supported(stack);
  if (k == 0) throw InputError("truncation length must be positive");

  Search search(t, b, xspecs, stack, options);

  // Family 1: single points at a maximizer of ||T(x)||.
  {
    const NormResult sup = sup_norm(t, {options.budget, derive_seed(options.seed, {kSupStream})});
    const std::vector<Vector> xs = split_witness(t, sup.witness);
    search.evaluate(single_point_sequences(t, xs, b.members().front()), "single-point");
  }

  // Family 2 candidates: index -> (common length L, one vertex per slot).
  std::vector<std::vector<Vector>> vertices;
  std::size_t tuples = 1;
  for (const LpSpace& d : t.domains()) {
    vertices.push_back(vertex_representatives(d));
    tuples = std::min(tuples * vertices.back().size(), kMaxVertexCandidates);
  }
  const std::size_t max_len = *std::max_element(b.bounds().begin(), b.bounds().end());
  const std::size_t vertex_candidates = std::min(max_len * tuples, kMaxVertexCandidates);

  auto vertex_candidate = [&](std::size_t index) -> std::optional<std::vector<VecSequence>> {
    const std::size_t len = 1 + index / tuples;
    std::size_t code = index % tuples;
    std::vector<VecSequence> seqs;
    for (std::size_t s = 0; s < n; ++s) {
      const Vector& v = vertices[s][code % vertices[s].size()];
      code /= vertices[s].size();
      const std::size_t l = std::min(len, b.bounds()[s]);
      if (l > k) return std::nullopt;
      seqs.emplace_back(t.domains()[s], std::vector<Vector>(l, v));
    }
    return seqs;
  };

  auto restart = [&](std::size_t r) {
    Rng rng(derive_seed(options.seed, {kRestartStream, r}));
    std::normal_distribution<double> gauss;
    std::vector<VecSequence> seqs;
    bool fits = true;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t len =
          std::uniform_int_distribution<std::size_t>(1, b.bounds()[s])(rng);
      fits = fits && len <= k;
      std::vector<Vector> entries;
      for (std::size_t j = 0; j < len; ++j) {
        Vector x(t.domains()[s].dim);
        for (auto& c : x) c = gauss(rng);
        entries.push_back(x);
      }
      seqs.emplace_back(t.domains()[s], std::move(entries));
    }
    if (fits) search.climb(std::move(seqs), rng);
  };

  // Families 2 and 3 interleave while vertex candidates remain.
  for (std::size_t unit = 0; unit < options.budget; ++unit) {
    if (unit < 2 * vertex_candidates) {
      if (unit % 2 == 0) {
        if (auto seqs = vertex_candidate(unit / 2)) search.evaluate(*seqs, "vertex-constant");
      } else {
        restart(unit / 2);
      }
    } else {
      restart(unit - vertex_candidates);
    }
  }

  SummingEstimate est;
  est.value = std::max(search.best_ratio(), 0.0);
  est.exact = search.exact();
  est.budget = options.budget;
  est.seed = options.seed;
  est.truncation = k;
  est.family = search.family();
  est.evaluations = search.evaluations();
  for (std::size_t s = 0; s < search.best().size(); ++s) {
    const VecSequence& seq = search.best()[s];
    const double norm = class_norm(xspecs[s], seq, search.norm_options()).value;
    est.witness.push_back(norm > 0.0 ? seq.scaled(1.0 / norm) : seq);
  }
  return est;
}

MultiOperator scalar_product_form(std::size_t n) {
  const LpSpace line(1, Exponent(1.0));
  return MultiOperator(std::vector<LpSpace>(n, line), line, {1.0});
}

double compatibility_margin(const std::vector<ClassSpec>& xspecs, const ClassStack& stack,
                            const Block& b, const std::vector<ScalarSequence>& lambdas) {
  const std::size_t n = b.arity();
  if (xspecs.size() != n || stack.size() != n || lambdas.size() != n) {
    throw InputError("compatibility needs one X class, Y class and sequence per slot");
  }
  const MultiOperator form = scalar_product_form(n);
  std::vector<VecSequence> seqs;
  double bound = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Vector> entries;
    for (double v : lambdas[k]) entries.push_back(Vector::Constant(1, v));
    seqs.emplace_back(form.domains()[k], std::move(entries));
    bound *= scalar_class_norm(xspecs[k], lambdas[k]);
  }
  return block_value(form, b, stack, seqs).value - bound;
}

CompatReport check_compatibility(const std::vector<ClassSpec>& xspecs,
                                 const ClassStack& stack, const Block& b,
                                 const std::vector<std::vector<ScalarSequence>>& samples,
                                 double tolerance) {
  CompatReport report;
  for (const auto& lambdas : samples) {
    const double margin = compatibility_margin(xspecs, stack, b, lambdas);
    ++report.samples;
    if (margin > report.worst_margin) {
      report.worst_margin = margin;
      report.witness = lambdas;
    }
  }
  report.pass = report.samples == 0 || report.worst_margin <= tolerance;
  return report;
}

DiagonalizabilityReport check_diagonalizable(const ClassSpec& y, const ClassSpec& z,
                                             const LpSpace& space,
                                             const std::vector<VecSequence>& samples,
                                             const SearchOptions& options,
                                             double tolerance) {
  const ClassStack stack{y, z};
  require_supported(stack);
  DiagonalizabilityReport report;
  for (const VecSequence& ys : samples) {
    if (!(ys.space == space)) throw InputError("diagonalizability sample in the wrong space");
    std::vector<JaggedArray> children;
    for (std::size_t j = 0; j < ys.size(); ++j) {
      std::vector<Vector> diag(j + 1, Vector::Zero(space.dim));
      diag[j] = ys.entries[j];
      children.push_back(JaggedArray::leaf(space, std::move(diag)));
    }
    const NormResult lhs =
        nested_norm(stack, JaggedArray::node(space, 2, std::move(children)), options);
    const NormResult rhs = class_norm(y, ys, options);
    report.exact = report.exact && lhs.exact && rhs.exact;
    const double dev = std::abs(lhs.value - rhs.value);
    report.worst_deviation = std::max(report.worst_deviation, dev);
    if (dev > tolerance * std::max(1.0, rhs.value)) report.pass = false;
    ++report.samples;
  }
  return report;
}

}  // namespace blocknorm
