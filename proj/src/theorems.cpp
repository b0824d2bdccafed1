#include "blocknorm/theorems.hpp"

#include <algorithm>
#include <cmath>

#include "blocknorm/error.hpp"
#include "blocknorm/rng.hpp"
#include "blocknorm/sampling.hpp"

namespace blocknorm {

namespace {

// Aggregates one relation over instances. The witness kept is the first
// failing instance if any, otherwise the one with the largest slack.
class Recorder {
 public:
  Recorder(std::string name, std::string relation, double tolerance) {
    a_.name = std::move(name);
    a_.relation = std::move(relation);
    a_.tolerance = tolerance;
  }

  template <class Witness>
  void identity(double lhs, double rhs, Witness&& witness) {
    const double slack = std::abs(lhs - rhs);
    record(lhs, rhs, slack, slack <= a_.tolerance * std::max(1.0, std::abs(rhs)), witness);
  }

  template <class Witness>
  void inequality(double lhs, double rhs, Witness&& witness) {
    const double slack = lhs - rhs;
    record(lhs, rhs, slack, slack <= a_.tolerance, witness);
  }

  const Assertion& assertion() const { return a_; }

 private:
  template <class Witness>
  void record(double lhs, double rhs, double slack, bool ok, Witness& witness) {
    ++a_.evaluated;
    const bool first = a_.evaluated == 1;
    a_.worst_slack = std::max(a_.worst_slack, slack);
    const bool replace = first || (!ok && witness_ok_) || (ok == witness_ok_ && slack > witness_slack_);
    if (replace) {
      json w = witness();
      w["lhs"] = lhs;
      w["rhs"] = rhs;
      w["slack"] = slack;
      a_.witness = std::move(w);
      witness_ok_ = ok;
      witness_slack_ = slack;
    }
    a_.pass = a_.pass && ok;
  }

  Assertion a_;
  bool witness_ok_ = true;
  double witness_slack_ = -std::numeric_limits<double>::infinity();
};

CheckReport finish(std::string name, std::size_t instances,
                   std::initializer_list<const Recorder*> recorders) {
  CheckReport r;
  r.name = std::move(name);
  r.instances = instances;
  for (const Recorder* rec : recorders) {
    r.assertions.push_back(rec->assertion());
    r.pass = r.pass && rec->assertion().pass;
  }
  return r;
}

json one_based(const IndexTuple& t) {
  json a = json::array();
  for (std::size_t i : t) a.push_back(i + 1);
  return a;
}

json points_json(const std::vector<Vector>& xs) {
  json a = json::array();
  for (const Vector& x : xs) a.push_back(to_json(x));
  return a;
}

void require_arity(const MultiOperator& t, const std::vector<VecSequence>& seqs) {
  if (seqs.size() != t.arity()) {
    throw InputError("sample has " + std::to_string(seqs.size()) +
                     " sequences, operator arity is " + std::to_string(t.arity()));
  }
}

std::vector<std::size_t> lengths_as_bounds(const std::vector<VecSequence>& seqs) {
  std::vector<std::size_t> bounds;
  for (const VecSequence& s : seqs) bounds.push_back(std::max<std::size_t>(1, s.size()));
  return bounds;
}

double value_norm(const MultiOperator& t, std::span<const Vector> xs) {
  return lp_norm(t(xs), t.codomain().exp);
}

}  // namespace

double CheckReport::worst_slack() const {
  double w = -std::numeric_limits<double>::infinity();
  for (const Assertion& a : assertions) w = std::max(w, a.worst_slack);
  return w;
}

void CheckReport::merge(const CheckReport& other) {
  instances += other.instances;
  pass = pass && other.pass;
  skipped = skipped && other.skipped;
  diagnostics.insert(diagnostics.end(), other.diagnostics.begin(), other.diagnostics.end());
  for (const Assertion& incoming : other.assertions) {
    auto it = std::find_if(assertions.begin(), assertions.end(),
                           [&](const Assertion& a) { return a.name == incoming.name; });
    if (it == assertions.end()) {
      assertions.push_back(incoming);
      continue;
    }
    const bool keep_mine = (!it->pass && incoming.pass) ||
                           (it->pass == incoming.pass && it->worst_slack >= incoming.worst_slack);
    if (!keep_mine) it->witness = incoming.witness;
    it->worst_slack = std::max(it->worst_slack, incoming.worst_slack);
    it->pass = it->pass && incoming.pass;
    it->evaluated += incoming.evaluated;
  }
}

json to_json(const CheckReport& report) {
  json assertions = json::array();
  for (const Assertion& a : report.assertions) {
    assertions.push_back({{"name", a.name},
                          {"relation", a.relation},
                          {"tolerance", a.tolerance},
                          {"pass", a.pass},
                          {"evaluated", a.evaluated},
                          {"worst_slack", a.evaluated ? json(a.worst_slack) : json()},
                          {"witness", a.witness}});
  }
  return {{"check", report.name},
          {"instances", report.instances},
          {"pass", report.pass},
          {"skipped", report.skipped},
          {"worst_slack", report.assertions.empty() || std::isinf(report.worst_slack())
                              ? json()
                              : json(report.worst_slack())},
          {"assertions", assertions},
          {"diagnostics", report.diagnostics}};
}

json to_json(const CompatReport& report) {
  json witness = json::array();
  for (const ScalarSequence& s : report.witness) witness.push_back(s);
  return {{"pass", report.pass},
          {"samples", report.samples},
          {"worst_margin", report.samples ? json(report.worst_margin) : json()},
          {"witness", witness}};
}

CheckReport check_norm_domination(const MultiOperator& t, const Block& b,
                                  const std::vector<ClassSpec>& xspecs,
                                  const ClassStack& stack,
                                  const std::vector<std::vector<Vector>>& points,
                                  std::size_t k, const SearchOptions& options,
                                  const Tolerances& tol) {
  Recorder single("single-point block value equals ||T(x)||", "identity", tol.identity);
  for (const std::vector<Vector>& xs : points) {
    const double fx = value_norm(t, xs);
    for (const IndexTuple& position : b.members()) {
      const auto seqs = single_point_sequences(t, xs, position);
      const double bv = block_value(t, b, stack, seqs, options).value;
      single.identity(bv, fx, [&] {
        return json{{"points", points_json(xs)}, {"position", one_based(position)}};
      });
    }
  }
  Recorder domination("sup norm <= summing estimate", "inequality", tol.chain);
  const NormResult sup = sup_norm(t, options);
  const SummingEstimate est = summing_norm(t, b, xspecs, stack, k, options);
  domination.inequality(sup.value, est.value, [&] {
    return json{{"sup_witness", points_json(split_witness(t, sup.witness))},
                {"summing_witness", to_json(est.witness)},
                {"truncation", k}};
  });
  CheckReport r = finish("norm-domination", points.size(), {&single, &domination});
  if (!sup.exact) r.diagnostics.push_back("sup_norm is an ascent lower bound for this operator");
  return r;
}

CheckReport check_ideal_inequality(const LinearMap& v, const MultiOperator& t,
                                   const std::vector<LinearMap>& us, const Block& b,
                                   const std::vector<ClassSpec>& xspecs,
                                   const ClassStack& stack,
                                   const std::vector<std::vector<VecSequence>>& samples,
                                   const SearchOptions& options, const Tolerances& tol) {
  if (us.size() != t.arity() || xspecs.size() != t.arity()) {
    throw InputError("ideal check needs one inner map and one X class per slot");
  }
  const MultiOperator composed = compose(v, t, us);
  const NormResult vnorm = linear_map_norm(v, options);
  std::vector<NormResult> unorms;
  for (const LinearMap& u : us) unorms.push_back(linear_map_norm(u, options));

  Recorder outer("||(v T u)^_B|| <= ||v|| ||T^_B(u x)||", "inequality", tol.chain);
  Recorder inner("||(u x_j)||_X <= ||u|| ||(x_j)||_X", "inequality", tol.chain);
  bool exact = vnorm.exact;
  for (const NormResult& n : unorms) exact = exact && n.exact;
  for (const auto& seqs : samples) {
    require_arity(composed, seqs);
    std::vector<VecSequence> mapped;
    for (std::size_t k = 0; k < seqs.size(); ++k) mapped.push_back(seqs[k].mapped(us[k]));
    const NormResult lhs = block_value(composed, b, stack, seqs, options);
    const NormResult rhs = block_value(t, b, stack, mapped, options);
    exact = exact && lhs.exact && rhs.exact;
    outer.inequality(lhs.value, vnorm.value * rhs.value, [&] {
      return json{{"sequences", to_json(seqs)}, {"map_norm", vnorm.value}};
    });
    for (std::size_t k = 0; k < seqs.size(); ++k) {
      const NormResult after = class_norm(xspecs[k], mapped[k], options);
      const NormResult before = class_norm(xspecs[k], seqs[k], options);
      exact = exact && after.exact && before.exact;
      inner.inequality(after.value, unorms[k].value * before.value, [&] {
        return json{{"slot", k + 1}, {"sequence", to_json(seqs[k])},
                    {"class", to_json(xspecs[k])}, {"map_norm", unorms[k].value}};
      });
    }
  }
  CheckReport r = finish("ideal", samples.size(), {&outer, &inner});
  if (!exact) {
    r.diagnostics.push_back("some norms are ascent lower bounds; the chain is not certified");
  }
  return r;
}

CheckReport check_finite_type_norm(const std::vector<Vec>& functionals, const Vec& b,
                                   const Block& block, const std::vector<ClassSpec>& xspecs,
                                   const ClassStack& stack, std::size_t k,
                                   const SearchOptions& options, const Tolerances& tol) {
  const std::size_t n = functionals.size();
  if (block.arity() != n || xspecs.size() != n || stack.size() != n) {
    throw InputError("finite-type check needs one block coordinate and class per functional");
  }
  // Compatibility pre-check on constant and random scalar sequences.
  std::vector<std::size_t> caps;
  for (std::size_t s = 0; s < n; ++s) caps.push_back(std::min(k, block.bounds()[s]));
  std::vector<std::vector<ScalarSequence>> samples;
  const std::size_t longest = *std::max_element(caps.begin(), caps.end());
  for (std::size_t len = 1; len <= longest; ++len) {
    std::vector<ScalarSequence> tuple;
    for (std::size_t s = 0; s < n; ++s) tuple.push_back(ScalarSequence(std::min(len, caps[s]), 1.0));
    samples.push_back(std::move(tuple));
  }
  Rng rng(derive_seed(options.seed, {0x636f6d70}));
  for (int i = 0; i < 64; ++i) {
    std::vector<ScalarSequence> tuple;
    for (std::size_t s = 0; s < n; ++s) {
      tuple.push_back(random_scalar_sequence(rng, uniform_index(rng, 1, caps[s])));
    }
    samples.push_back(std::move(tuple));
  }
  const CompatReport compat = check_compatibility(xspecs, stack, block, samples, tol.identity);
  if (!compat.pass) {
    CheckReport r;
    r.name = "finite-type";
    r.skipped = true;
    r.diagnostics.push_back("classes are not compatible with the block (margin " +
                            std::to_string(compat.worst_margin) + "); check skipped");
    return r;
  }

  const MultiOperator t = finite_type(functionals, b);
  double expected = vec_norm(b);
  for (const Vec& phi : functionals) expected *= functional_norm(phi);
  const SummingEstimate est = summing_norm(t, block, xspecs, stack, k, options);
  Recorder eq("summing norm equals ||b|| prod ||phi_k||", "identity", tol.chain);
  eq.identity(est.value, expected, [&] {
    return json{{"witness", to_json(est.witness)}, {"family", est.family}};
  });
  CheckReport r = finish("finite-type", 1, {&eq});
  if (!est.exact) r.diagnostics.push_back("summing estimate used inexact norms");
  return r;
}

CheckReport check_diagonal_reduction(const MultiOperator& t, double q, const ClassSpec& z,
                                     const std::vector<std::vector<VecSequence>>& samples,
                                     const Tolerances& tol) {
  const std::size_t n = t.arity();
  ClassStack stack(n, z);
  stack.front() = ClassSpec::strong(q);
  Recorder eq("diagonal block value equals (sum_j ||T(x_j)||^q)^(1/q)", "identity",
              tol.identity);
  for (const auto& seqs : samples) {
    require_arity(t, seqs);
    const auto lengths = lengths_as_bounds(seqs);
    const std::size_t len = *std::max_element(lengths.begin(), lengths.end());
    const Block b = Block::diagonal(std::vector<std::size_t>(n, len));
    const double lhs = block_value(t, b, stack, seqs).value;
    double sum = 0.0;
    for (std::size_t j = 0; j < len; ++j) {
      std::vector<Vector> xs;
      for (const VecSequence& s : seqs) {
        if (j < s.size()) xs.push_back(s.entries[j]);
      }
      if (xs.size() == n) sum += std::pow(value_norm(t, xs), q);
    }
    eq.identity(lhs, std::pow(sum, 1.0 / q), [&] {
      return json{{"sequences", to_json(seqs)}, {"stack", to_json(stack)}};
    });
  }
  return finish("diagonal", samples.size(), {&eq});
}

CheckReport check_multiple_formula(const MultiOperator& t, const std::vector<double>& qs,
                                   const std::vector<std::vector<VecSequence>>& samples,
                                   const Tolerances& tol) {
  const std::size_t n = t.arity();
  if (qs.size() != n) throw InputError("multiple formula needs one exponent per slot");
  ClassStack stack;
  for (double q : qs) stack.push_back(ClassSpec::strong(q));
  Recorder eq("full block value equals the iterated sum", "identity", tol.identity);
  for (const auto& seqs : samples) {
    require_arity(t, seqs);
    const Block b = Block::full(lengths_as_bounds(seqs));
    const double lhs = block_value(t, b, stack, seqs).value;
    std::vector<Vector> xs;
    auto iterated = [&](auto&& self, std::size_t level) -> double {
      if (level == n) return value_norm(t, xs);
      double sum = 0.0;
      for (const Vector& x : seqs[level].entries) {
        xs.push_back(x);
        sum += std::pow(self(self, level + 1), qs[level]);
        xs.pop_back();
      }
      return std::pow(sum, 1.0 / qs[level]);
    };
    eq.identity(lhs, iterated(iterated, 0), [&] {
      return json{{"sequences", to_json(seqs)}, {"exponents", qs}};
    });
  }
  return finish("multiple", samples.size(), {&eq});
}

ClassStack partition_stack(double q1, double q2) {
  return {ClassSpec::strong(q1), ClassSpec::sup(), ClassSpec::strong(q2)};
}

CheckReport check_partition_formula(const MultiOperator& t, const ClassStack& stack,
                                    double q1, double q2,
                                    const std::vector<std::vector<VecSequence>>& samples,
                                    const Tolerances& tol) {
  if (t.arity() != 3 || stack.size() != 3) {
    throw InputError("partition formula needs a trilinear operator and a 3-level stack");
  }
  Recorder eq("equality-block value equals the double sum", "identity", tol.identity);
  for (const auto& seqs : samples) {
    require_arity(t, seqs);
    const auto lengths = lengths_as_bounds(seqs);
    const std::size_t paired = std::max(lengths[0], lengths[1]);
    const Block b = Block::equality(0, 1, {paired, paired, lengths[2]});
    const double lhs = block_value(t, b, stack, seqs).value;
    double outer = 0.0;
    const std::size_t common = std::min(seqs[0].size(), seqs[1].size());
    for (std::size_t j1 = 0; j1 < common; ++j1) {
      double inner = 0.0;
      for (const Vector& z : seqs[2].entries) {
        const Vector xs[] = {seqs[0].entries[j1], seqs[1].entries[j1], z};
        inner += std::pow(value_norm(t, xs), q2);
      }
      outer += std::pow(inner, q1 / q2);
    }
    eq.identity(lhs, std::pow(outer, 1.0 / q1), [&] {
      return json{{"sequences", to_json(seqs)}, {"stack", to_json(stack)},
                  {"q1", q1}, {"q2", q2}};
    });
  }
  return finish("partition", samples.size(), {&eq});
}

CheckReport check_coincidence(const MultiOperator& a, const std::vector<ClassSpec>& xspecs,
                              double q, std::optional<CoincidenceConstants> constants,
                              const std::vector<std::vector<VecSequence>>& samples,
                              const SearchOptions& options, const Tolerances& tol) {
  if (a.arity() != 2 || xspecs.size() != 2) {
    throw InputError("coincidence check needs a bilinear operator and two X classes");
  }
  if (!constants) {
    const ClassSpec l1 = ClassSpec::strong(1.0);
    if (!(xspecs[0] == l1 && xspecs[1] == l1 && q == 1.0)) {
      throw InputError("coincidence check refused: only X = (strong(1), strong(1)) with q = 1 "
                       "has built-in constants; assert c1 and c2 for other regimes");
    }
    constants = CoincidenceConstants{};
  }
  if (!(constants->c1 > 0.0) || !(constants->c2 > 0.0)) {
    throw InputError("coincidence constants must be positive");
  }
  const ClassStack stack{ClassSpec::strong(q), ClassSpec::strong(q)};
  const NormResult sup = sup_norm(a, options);
  const double factor = constants->c1 * constants->c2 * sup.value;

  Recorder curry("curried rows match the block image", "identity", tol.identity);
  Recorder bound("block value <= C1 C2 ||A|| prod ||x||_X", "inequality", tol.chain);
  bool exact = sup.exact;
  for (const auto& seqs : samples) {
    require_arity(a, seqs);
    const Block b = Block::full(lengths_as_bounds(seqs));
    const JaggedArray image = block_image(a, b, seqs);
    double deviation = 0.0;
    double scale = 0.0;
    const Vector zero_y = Vector::Zero(a.domains()[1].dim);
    for (std::size_t j1 = 0; j1 < b.bounds()[0]; ++j1) {
      const auto& row = image.children()[j1].values();
      std::optional<LinearMap> ax;
      if (j1 < seqs[0].size()) {
        const Vector xs[] = {seqs[0].entries[j1], zero_y};
        ax = a.partial_map(xs, 1);
      }
      for (std::size_t j2 = 0; j2 < row.size(); ++j2) {
        const Vector expected = ax && j2 < seqs[1].size() ? (*ax)(seqs[1].entries[j2])
                                                          : Vector::Zero(a.codomain().dim);
        deviation = std::max(deviation, (row[j2] - expected).cwiseAbs().maxCoeff());
        scale = std::max(scale, expected.cwiseAbs().maxCoeff());
      }
    }
    // Compare the deviation against the tolerance relative to the entry scale.
    curry.identity(scale + deviation, scale, [&] { return json{{"sequences", to_json(seqs)}}; });

    const NormResult lhs = block_value(a, b, stack, seqs, options);
    double rhs = factor;
    for (std::size_t k = 0; k < 2; ++k) {
      const NormResult xn = class_norm(xspecs[k], seqs[k], options);
      exact = exact && xn.exact;
      rhs *= xn.value;
    }
    exact = exact && lhs.exact;
    bound.inequality(lhs.value, rhs, [&] {
      return json{{"sequences", to_json(seqs)}, {"sup_norm", sup.value},
                  {"c1", constants->c1}, {"c2", constants->c2}};
    });
  }
  CheckReport r = finish("coincidence", samples.size(), {&curry, &bound});
  if (!exact) r.diagnostics.push_back("some norms are ascent lower bounds; the bound is not certified");
  return r;
}

CompatReport find_incompatibility_witness(const std::vector<ClassSpec>& xspecs,
                                          const ClassStack& stack, const Block& b,
                                          std::size_t k, const SearchOptions& options,
                                          double tolerance) {
  const std::size_t n = b.arity();
  if (xspecs.size() != n || stack.size() != n) {
    throw InputError("witness search needs one X class and one Y class per block coordinate");
  }
  if (k == 0) throw InputError("truncation length must be positive");
  std::vector<std::size_t> caps;
  for (std::size_t bound : b.bounds()) caps.push_back(std::min(k, bound));

  CompatReport report;
  std::optional<double> current;
  // Margin of the X-normalized tuple; nullopt when some sequence is zero.
  auto margin = [&](const std::vector<ScalarSequence>& lambdas)
      -> std::optional<std::pair<double, std::vector<ScalarSequence>>> {
    std::vector<ScalarSequence> normalized;
    for (std::size_t s = 0; s < n; ++s) {
      const double xn = scalar_class_norm(xspecs[s], lambdas[s]);
      if (xn == 0.0) return std::nullopt;
      ScalarSequence l = lambdas[s];
      for (double& v : l) v /= xn;
      normalized.push_back(std::move(l));
    }
    const double m = compatibility_margin(xspecs, stack, b, normalized);
    return std::make_pair(m, std::move(normalized));
  };
  auto offer = [&](const std::vector<ScalarSequence>& lambdas) -> std::optional<double> {
    auto r = margin(lambdas);
    if (!r) return std::nullopt;
    ++report.samples;
    if (r->first > report.worst_margin) {
      report.worst_margin = r->first;
      report.witness = std::move(r->second);
    }
    return r->first;
  };

  // Constant sequences of a common length.
  const std::size_t longest = *std::max_element(caps.begin(), caps.end());
  for (std::size_t len = 1; len <= longest; ++len) {
    std::vector<ScalarSequence> tuple;
    for (std::size_t s = 0; s < n; ++s) tuple.push_back(ScalarSequence(std::min(len, caps[s]), 1.0));
    offer(tuple);
  }
  // Constant sequences with independent dyadic lengths per slot.
  std::vector<std::vector<std::size_t>> grids;
  std::size_t combos = 1;
  for (std::size_t cap : caps) {
    std::vector<std::size_t> g;
    for (std::size_t len = 1; len < cap; len *= 2) g.push_back(len);
    g.push_back(cap);
    combos *= g.size();
    grids.push_back(std::move(g));
  }
  if (combos <= 4096) {
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t code = c;
      std::vector<ScalarSequence> tuple;
      for (std::size_t s = 0; s < n; ++s) {
        tuple.push_back(ScalarSequence(grids[s][code % grids[s].size()], 1.0));
        code /= grids[s].size();
      }
      offer(tuple);
    }
  }
  // Power-type decay (j+1)^(-alpha).
  for (double alpha : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0}) {
    std::vector<ScalarSequence> tuple;
    for (std::size_t s = 0; s < n; ++s) {
      ScalarSequence l(caps[s]);
      for (std::size_t j = 0; j < l.size(); ++j) l[j] = std::pow(static_cast<double>(j + 1), -alpha);
      tuple.push_back(std::move(l));
    }
    offer(tuple);
  }
  // Random restarts with multiplicative hill-climbing.
  for (std::size_t r = 0; r < options.budget; ++r) {
    Rng rng(derive_seed(options.seed, {r}));
    std::vector<ScalarSequence> tuple;
    for (std::size_t s = 0; s < n; ++s) {
      tuple.push_back(random_scalar_sequence(rng, uniform_index(rng, 1, caps[s])));
    }
    current = offer(tuple);
    if (!current) continue;
    std::normal_distribution<double> gauss(0.0, 0.3);
    for (int h = 0; h < 30; ++h) {
      auto trial = tuple;
      const std::size_t s = uniform_index(rng, 0, n - 1);
      const std::size_t j = uniform_index(rng, 0, trial[s].size() - 1);
      trial[s][j] *= std::exp(gauss(rng));
      const auto m = offer(trial);
      if (m && *m > *current) {
        current = m;
        tuple = std::move(trial);
      }
    }
  }
  report.pass = report.samples == 0 || report.worst_margin <= tolerance;
  return report;
}

}  // namespace blocknorm
