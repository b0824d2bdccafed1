#include "blocknorm/suites.hpp"

#include <algorithm>
#include <functional>

#include "blocknorm/error.hpp"
#include "blocknorm/sampling.hpp"

namespace blocknorm {

namespace {

using Instance = std::function<CheckReport(Rng&, const SuiteOptions&, std::uint64_t seed)>;

double random_q(Rng& rng) {
  static constexpr double qs[] = {1.0, 1.5, 2.0, 3.0};
  return qs[uniform_index(rng, 0, 3)];
}

std::vector<LpSpace> random_spaces(Rng& rng, std::size_t n, std::size_t max_dim,
                                   bool polytope_only) {
  std::vector<LpSpace> spaces;
  for (std::size_t k = 0; k < n; ++k) {
    spaces.emplace_back(uniform_index(rng, 1, max_dim), random_exponent(rng, polytope_only));
  }
  return spaces;
}

LpSpace random_space(Rng& rng, std::size_t max_dim, bool polytope_only = false) {
  return random_spaces(rng, 1, max_dim, polytope_only).front();
}

std::vector<std::size_t> random_bounds(Rng& rng, std::size_t n, std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> bounds;
  for (std::size_t k = 0; k < n; ++k) bounds.push_back(uniform_index(rng, lo, hi));
  return bounds;
}

Block random_block(Rng& rng, std::vector<std::size_t> bounds, bool with_explicit) {
  const std::size_t n = bounds.size();
  switch (uniform_index(rng, 0, with_explicit ? 3 : 2)) {
    case 0:
      return Block::diagonal(bounds);
    case 1:
      return Block::full(bounds);
    case 2:
      if (n >= 2) {
        const std::size_t a = uniform_index(rng, 0, n - 1);
        std::size_t b = uniform_index(rng, 0, n - 2);
        if (b >= a) ++b;
        return Block::equality(a, b, bounds);
      }
      return Block::full(bounds);
    default: {
      std::vector<IndexTuple> members;
      const std::size_t count = uniform_index(rng, 1, 6);
      for (std::size_t m = 0; m < count; ++m) {
        IndexTuple t;
        for (std::size_t bound : bounds) t.push_back(uniform_index(rng, 0, bound - 1));
        members.push_back(std::move(t));
      }
      return Block::explicit_set(bounds, std::move(members));
    }
  }
}

ClassStack random_strong_stack(Rng& rng, std::size_t n) {
  ClassStack stack;
  for (std::size_t k = 0; k < n; ++k) stack.push_back(ClassSpec::strong(random_q(rng)));
  return stack;
}

// Any class; weak only when `allow_weak`.
ClassSpec random_class(Rng& rng, bool allow_weak) {
  switch (uniform_index(rng, 0, allow_weak ? 2 : 1)) {
    case 0:
      return ClassSpec::strong(random_q(rng));
    case 1:
      return ClassSpec::sup();
    default:
      return ClassSpec::weak(random_q(rng));
  }
}

std::vector<std::vector<VecSequence>> random_samples(Rng& rng, const std::vector<LpSpace>& spaces,
                                                     const std::vector<std::size_t>& max_lengths,
                                                     std::size_t count, std::size_t min_length) {
  std::vector<std::vector<VecSequence>> samples;
  for (std::size_t i = 0; i < count; ++i) {
    samples.push_back(random_sequences(rng, spaces, max_lengths, min_length));
  }
  return samples;
}

CheckReport norm_domination(Rng& rng, const SuiteOptions& o, std::uint64_t seed) {
  const std::size_t n = uniform_index(rng, 2, 3);
  const auto domains = random_spaces(rng, n, 4, true);
  const MultiOperator t = random_operator(rng, domains, random_space(rng, 4));
  const auto bounds = random_bounds(rng, n, 2, 3);
  const Block b = uniform_index(rng, 0, 1) == 0 ? Block::diagonal(bounds) : Block::full(bounds);
  std::vector<std::vector<Vector>> points;
  for (int i = 0; i < 2; ++i) {
    std::vector<Vector> xs;
    for (const LpSpace& d : domains) xs.push_back(gaussian_vector(rng, d.dim));
    points.push_back(std::move(xs));
  }
  const std::vector<ClassSpec> xspecs(n, ClassSpec::strong(1.0));
  return check_norm_domination(t, b, xspecs, random_strong_stack(rng, n), points,
                               *std::max_element(bounds.begin(), bounds.end()),
                               {o.budget, seed}, o.tol);
}

CheckReport finite_type_suite(Rng& rng, const SuiteOptions& o, std::uint64_t seed) {
  const std::size_t n = uniform_index(rng, 2, 3);
  std::vector<Vec> functionals;
  for (const LpSpace& d : random_spaces(rng, n, 3, false)) {
    functionals.emplace_back(d, gaussian_vector(rng, d.dim));
  }
  const LpSpace f = random_space(rng, 3);
  const Vec bvec(f, gaussian_vector(rng, f.dim));
  const auto bounds = random_bounds(rng, n, 2, 3);
  const Block b = random_block(rng, bounds, false);
  const std::vector<ClassSpec> xspecs(n, ClassSpec::strong(1.0));
  ClassStack stack;
  for (std::size_t k = 0; k < n; ++k) stack.push_back(ClassSpec::strong(uniform_index(rng, 1, 3)));
  return check_finite_type_norm(functionals, bvec, b, xspecs, stack,
                                *std::max_element(bounds.begin(), bounds.end()),
                                {o.budget, seed}, o.tol);
}

CheckReport ideal_suite(Rng& rng, const SuiteOptions& o, std::uint64_t seed) {
  const std::size_t n = uniform_index(rng, 2, 3);
  const auto inner = random_spaces(rng, n, 3, true);
  const auto domains = random_spaces(rng, n, 3, true);
  const LpSpace f = random_space(rng, 3, true);
  const LpSpace h = random_space(rng, 3, true);
  const MultiOperator t = random_operator(rng, domains, f);
  std::vector<LinearMap> us;
  for (std::size_t k = 0; k < n; ++k) us.push_back(random_linear_map(rng, inner[k], domains[k]));
  const LinearMap v = random_linear_map(rng, f, h);
  const auto bounds = random_bounds(rng, n, 2, 3);
  const Block b = random_block(rng, bounds, true);
  std::vector<ClassSpec> xspecs;
  for (std::size_t k = 0; k < n; ++k) xspecs.push_back(random_class(rng, true));
  ClassStack stack;
  for (std::size_t k = 0; k < n; ++k) stack.push_back(random_class(rng, k + 1 == n));
  const auto samples = random_samples(rng, inner, bounds, 3, 1);
  return check_ideal_inequality(v, t, us, b, xspecs, stack, samples, {o.budget, seed}, o.tol);
}

CheckReport compatibility_suite(Rng& rng, const SuiteOptions& o, std::uint64_t) {
  const std::size_t n = uniform_index(rng, 1, 3);
  std::vector<ClassSpec> xspecs;
  ClassStack stack;
  for (std::size_t k = 0; k < n; ++k) {
    const double p = random_q(rng);
    xspecs.push_back(uniform_index(rng, 0, 1) ? ClassSpec::strong(p) : ClassSpec::weak(p));
    switch (uniform_index(rng, 0, 3)) {
      case 0:
        stack.push_back(ClassSpec::strong(p));
        break;
      case 1:
        stack.push_back(ClassSpec::strong(p + 0.5));
        break;
      case 2:
        stack.push_back(k + 1 == n ? ClassSpec::weak(2.0 * p) : ClassSpec::strong(2.0 * p));
        break;
      default:
        stack.push_back(ClassSpec::sup());
    }
  }
  const auto bounds = random_bounds(rng, n, 1, 5);
  const Block b = random_block(rng, bounds, true);
  std::vector<ScalarSequence> lambdas;
  for (std::size_t k = 0; k < n; ++k) {
    lambdas.push_back(random_scalar_sequence(rng, uniform_index(rng, 1, bounds[k])));
  }
  const double margin = compatibility_margin(xspecs, stack, b, lambdas);
  double bound = 1.0;
  for (std::size_t k = 0; k < n; ++k) bound *= scalar_class_norm(xspecs[k], lambdas[k]);
  CheckReport r;
  r.name = "compatibility";
  r.instances = 1;
  Assertion a;
  a.name = "block product norm <= prod ||lambda||_X";
  a.relation = "inequality";
  a.tolerance = o.tol.identity;
  a.evaluated = 1;
  a.worst_slack = margin;
  a.pass = margin <= o.tol.identity * std::max(1.0, bound);
  json seqs = json::array();
  for (const auto& l : lambdas) seqs.push_back(l);
  a.witness = {{"x", to_json(xspecs)}, {"stack", to_json(stack)}, {"block", to_json(b)},
               {"sequences", seqs}, {"lhs", margin + bound}, {"rhs", bound}, {"slack", margin}};
  r.pass = a.pass;
  r.assertions.push_back(std::move(a));
  return r;
}

CheckReport diagonal_suite(Rng& rng, const SuiteOptions& o, std::uint64_t) {
  const std::size_t n = uniform_index(rng, 2, 3);
  const auto domains = random_spaces(rng, n, 3, false);
  const MultiOperator t = random_operator(rng, domains, random_space(rng, 3));
  const double q = random_q(rng);
  const auto samples = random_samples(rng, domains, std::vector<std::size_t>(n, 4), 1, 1);
  CheckReport r;
  r.name = "diagonal";
  const std::vector<ClassSpec> zs = {ClassSpec::strong(1.0), ClassSpec::strong(2.0),
                                     ClassSpec::sup()};
  std::vector<double> values;
  for (const ClassSpec& z : zs) {
    CheckReport part = check_diagonal_reduction(t, q, z, samples, o.tol);
    part.instances = 0;
    r.merge(part);
    ClassStack stack(n, z);
    stack.front() = ClassSpec::strong(q);
    std::size_t len = 1;
    for (const auto& s : samples.front()) len = std::max(len, s.size());
    values.push_back(
        block_value(t, Block::diagonal(std::vector<std::size_t>(n, len)), stack, samples.front())
            .value);
  }
  const double spread = *std::max_element(values.begin(), values.end()) -
                        *std::min_element(values.begin(), values.end());
  Assertion inv;
  inv.name = "value independent of the inner class";
  inv.relation = "identity";
  inv.tolerance = o.tol.identity;
  inv.evaluated = 1;
  inv.worst_slack = spread;
  inv.pass = spread <= o.tol.identity * std::max(1.0, values.front());
  inv.witness = {{"sequences", to_json(samples.front())}, {"values", values},
                 {"lhs", values.front() + spread}, {"rhs", values.front()}, {"slack", spread}};
  CheckReport extra;
  extra.name = "diagonal";
  extra.pass = inv.pass;
  extra.assertions.push_back(std::move(inv));
  r.merge(extra);
  r.instances = 1;
  return r;
}

CheckReport multiple_suite(Rng& rng, const SuiteOptions& o, std::uint64_t) {
  const std::size_t n = uniform_index(rng, 2, 3);
  const auto domains = random_spaces(rng, n, 3, false);
  const MultiOperator t = random_operator(rng, domains, random_space(rng, 3));
  std::vector<double> qs;
  for (std::size_t k = 0; k < n; ++k) qs.push_back(random_q(rng));
  return check_multiple_formula(t, qs,
                                random_samples(rng, domains, std::vector<std::size_t>(n, 3), 1, 0),
                                o.tol);
}

CheckReport partition_suite(Rng& rng, const SuiteOptions& o, std::uint64_t) {
  const auto domains = random_spaces(rng, 3, 3, false);
  const MultiOperator t = random_operator(rng, domains, random_space(rng, 3));
  const double q1 = random_q(rng);
  const double q2 = random_q(rng);
  return check_partition_formula(
      t, partition_stack(q1, q2), q1, q2,
      random_samples(rng, domains, std::vector<std::size_t>(3, 3), 1, 0), o.tol);
}

CheckReport coincidence_suite(Rng& rng, const SuiteOptions& o, std::uint64_t seed) {
  std::vector<LpSpace> domains;
  for (int k = 0; k < 2; ++k) domains.emplace_back(uniform_index(rng, 1, 4), Exponent(1.0));
  const MultiOperator a = random_operator(rng, domains, random_space(rng, 3));
  const std::vector<ClassSpec> xspecs(2, ClassSpec::strong(1.0));
  return check_coincidence(a, xspecs, 1.0, std::nullopt,
                           random_samples(rng, domains, {4, 4}, 1, 1), {o.budget, seed}, o.tol);
}

CheckReport diagonalizable_suite(Rng& rng, const SuiteOptions& o, std::uint64_t seed) {
  const ClassSpec y = uniform_index(rng, 0, 1) ? ClassSpec::strong(random_q(rng)) : ClassSpec::sup();
  const ClassSpec z = random_class(rng, true);
  const LpSpace space = random_space(rng, 3);
  const VecSequence ys = random_sequence(rng, space, uniform_index(rng, 1, 5));
  const DiagonalizabilityReport d =
      check_diagonalizable(y, z, space, {ys}, {o.budget, seed}, o.tol.identity);
  CheckReport r;
  r.name = "diagonalizable";
  r.instances = 1;
  Assertion a;
  a.name = "||(y_j e_j)||_{Y(Z)} equals ||(y_j)||_Y";
  a.relation = "identity";
  a.tolerance = o.tol.identity;
  a.evaluated = 1;
  a.worst_slack = d.worst_deviation;
  a.pass = d.pass;
  a.witness = {{"y", to_json(y)}, {"z", to_json(z)}, {"space", to_json(space)},
               {"sequence", to_json(ys)}, {"slack", d.worst_deviation}};
  r.pass = d.pass;
  r.assertions.push_back(std::move(a));
  if (!d.exact) r.diagnostics.push_back("weak norm evaluated by ascent");
  return r;
}

const std::vector<std::pair<std::string, Instance>>& registry() {
  static const std::vector<std::pair<std::string, Instance>> suites = {
      {"norm-domination", norm_domination},
      {"finite-type", finite_type_suite},
      {"ideal", ideal_suite},
      {"compatibility", compatibility_suite},
      {"diagonal", diagonal_suite},
      {"multiple", multiple_suite},
      {"partition", partition_suite},
      {"coincidence", coincidence_suite},
      {"diagonalizable", diagonalizable_suite},
  };
  return suites;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : registry()) v.push_back(name);
    return v;
  }();
  return names;
}

CheckReport run_suite(const std::string& name, const SuiteOptions& options) {
  const auto& suites = registry();
  auto it = std::find_if(suites.begin(), suites.end(),
                         [&](const auto& entry) { return entry.first == name; });
  if (it == suites.end()) throw InputError("unknown suite \"" + name + "\"");
  const std::uint64_t stream = static_cast<std::uint64_t>(it - suites.begin());
  CheckReport total;
  total.name = name;
  total.skipped = options.instances > 0;
  for (std::size_t i = 0; i < options.instances; ++i) {
    const std::uint64_t seed = derive_seed(options.seed, {stream, i});
    Rng rng(seed);
    CheckReport r = it->second(rng, options, derive_seed(seed, {1}));
    for (std::string& d : r.diagnostics) d = "instance " + std::to_string(i) + ": " + d;
    total.merge(r);
  }
  // Cap the diagnostics list.
  if (total.diagnostics.size() > 20) {
    const std::size_t extra = total.diagnostics.size() - 20;
    total.diagnostics.resize(20);
    total.diagnostics.push_back("... " + std::to_string(extra) + " more diagnostics");
  }
  total.name = name;
  return total;
}

}  // namespace blocknorm
