#pragma once

// Direct reference computations for the tests. These avoid the library's
// code paths on purpose: plain loops over tensor indices and block members.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "blocknorm/blocks.hpp"
#include "blocknorm/multilinear.hpp"
#include "blocknorm/seqnorms.hpp"

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double lp(const std::vector<double>& v, double p) {
  double out = 0.0;
  if (std::isinf(p)) {
    for (double x : v) out = std::max(out, std::abs(x));
    return out;
  }
  for (double x : v) out += std::pow(std::abs(x), p);
  return std::pow(out, 1.0 / p);
}

inline std::vector<double> to_std(const Eigen::VectorXd& x) {
  return std::vector<double>(x.data(), x.data() + x.size());
}

inline double lp(const Eigen::VectorXd& x, double p) { return lp(to_std(x), p); }

/// T(x_1..x_n) by summing over every tensor index.
inline std::vector<double> apply(const blocknorm::MultiOperator& t,
                                 const std::vector<Eigen::VectorXd>& xs) {
  const auto shape = t.shape();
  const std::size_t n = t.arity();
  const std::size_t mf = shape.back();
  std::vector<double> out(mf, 0.0);
  std::vector<std::size_t> idx(n, 0);
  const auto& c = t.coefficients();
  std::size_t flat = 0;
  while (true) {
    double w = 1.0;
    for (std::size_t k = 0; k < n; ++k) w *= xs[k][idx[k]];
    for (std::size_t o = 0; o < mf; ++o) out[o] += c[flat * mf + o] * w;
    ++flat;
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++idx[k] < shape[k]) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
  }
}

inline double codomain_p(const blocknorm::MultiOperator& t) { return t.codomain().exp.value(); }

/// Block value for stacks of strong and sup classes, by scanning the member
/// list for each fiber.
inline double block_value(const blocknorm::MultiOperator& t, const blocknorm::Block& b,
                          const std::vector<double>& stack_p,
                          const std::vector<blocknorm::VecSequence>& seqs) {
  const std::size_t n = t.arity();
  std::vector<std::size_t> prefix;
  auto entry = [&](std::size_t k, std::size_t j) -> Eigen::VectorXd {
    if (j < seqs[k].size()) return seqs[k].entries[j];
    return Eigen::VectorXd::Zero(t.domains()[k].dim);
  };
  auto rec = [&](auto&& self, std::size_t level) -> double {
    std::vector<double> vals;
    if (level + 1 == n) {
      for (const auto& m : b.members()) {
        if (!std::equal(prefix.begin(), prefix.end(), m.begin())) continue;
        std::vector<Eigen::VectorXd> xs;
        for (std::size_t k = 0; k < n; ++k) xs.push_back(entry(k, m[k]));
        vals.push_back(lp(oracle::apply(t, xs), codomain_p(t)));
      }
    } else {
      for (std::size_t j = 0; j < b.bounds()[level]; ++j) {
        prefix.push_back(j);
        vals.push_back(self(self, level + 1));
        prefix.pop_back();
      }
    }
    return lp(vals, stack_p[level]);
  };
  return rec(rec, 0);
}

/// All signed canonical vectors, or all sign vectors: the extreme points of
/// the l_1 and l_inf balls.
inline std::vector<Eigen::VectorXd> extreme_points(std::size_t dim, double p) {
  std::vector<Eigen::VectorXd> pts;
  if (p == 1.0 || dim == 1) {
    for (std::size_t i = 0; i < dim; ++i) {
      for (double s : {1.0, -1.0}) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
        e[i] = s;
        pts.push_back(e);
      }
    }
  } else {
    for (std::size_t mask = 0; mask < (std::size_t{1} << dim); ++mask) {
      Eigen::VectorXd e(dim);
      for (std::size_t i = 0; i < dim; ++i) e[i] = (mask >> i & 1) ? -1.0 : 1.0;
      pts.push_back(e);
    }
  }
  return pts;
}

/// Extreme points of the X ball restricted to sequences of length <= k, for
/// X = strong(1) (single entries) or sup (products of entries).
inline std::vector<blocknorm::VecSequence> truncated_ball_vertices(const blocknorm::ClassSpec& x,
                                                                   const blocknorm::LpSpace& s,
                                                                   std::size_t k) {
  const auto pts = extreme_points(s.dim, s.exp.value());
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(s.dim);
  std::vector<blocknorm::VecSequence> out;
  if (x.kind() == blocknorm::ClassSpec::Kind::Sup) {
    std::vector<std::size_t> idx(k, 0);
    while (true) {
      std::vector<Eigen::VectorXd> entries;
      for (std::size_t i : idx) entries.push_back(pts[i]);
      out.emplace_back(s, entries);
      std::size_t j = 0;
      while (j < k && ++idx[j] == pts.size()) idx[j++] = 0;
      if (j == k) return out;
    }
  }
  for (std::size_t pos = 0; pos < k; ++pos) {
    for (const auto& a : pts) {
      std::vector<Eigen::VectorXd> entries(pos, zero);
      entries.push_back(a);
      out.emplace_back(s, entries);
    }
  }
  return out;
}

inline std::vector<Eigen::VectorXd> entries_at(const std::vector<blocknorm::VecSequence>& seqs,
                                               const std::vector<std::size_t>& js) {
  std::vector<Eigen::VectorXd> xs;
  for (std::size_t k = 0; k < seqs.size(); ++k) {
    xs.push_back(js[k] < seqs[k].size() ? seqs[k].entries[js[k]]
                                        : Eigen::VectorXd::Zero(seqs[k].space.dim));
  }
  return xs;
}

/// (sum_j ||T(x^(1)_j, ..., x^(n)_j)||^q)^(1/q) over j < len.
inline double diagonal_sum(const blocknorm::MultiOperator& t, double q,
                           const std::vector<blocknorm::VecSequence>& seqs, std::size_t len) {
  double s = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    s += std::pow(lp(oracle::apply(t, entries_at(seqs, std::vector<std::size_t>(seqs.size(), j))),
                     codomain_p(t)),
                  q);
  }
  return std::pow(s, 1.0 / q);
}

/// Iterated sum over j_1 < bounds[0], ..., j_n < bounds[n-1] with exponents qs.
inline double iterated_sum(const blocknorm::MultiOperator& t, const std::vector<double>& qs,
                           const std::vector<blocknorm::VecSequence>& seqs,
                           const std::vector<std::size_t>& bounds) {
  std::vector<std::size_t> js;
  auto rec = [&](auto&& self, std::size_t level) -> double {
    double s = 0.0;
    for (std::size_t j = 0; j < bounds[level]; ++j) {
      js.push_back(j);
      const double v = level + 1 == bounds.size()
                           ? lp(oracle::apply(t, entries_at(seqs, js)), codomain_p(t))
                           : self(self, level + 1);
      js.pop_back();
      s += std::pow(v, qs[level]);
    }
    return std::pow(s, 1.0 / qs[level]);
  };
  return rec(rec, 0);
}

/// (sum_{j1 < len1} (sum_{j2 < len3} ||T(x_{j1}, y_{j1}, z_{j2})||^q2)^(q1/q2))^(1/q1).
inline double partition_sum(const blocknorm::MultiOperator& t, double q1, double q2,
                            const std::vector<blocknorm::VecSequence>& seqs, std::size_t len1,
                            std::size_t len3) {
  double outer = 0.0;
  for (std::size_t a = 0; a < len1; ++a) {
    double inner = 0.0;
    for (std::size_t c = 0; c < len3; ++c) {
      inner += std::pow(lp(oracle::apply(t, entries_at(seqs, {a, a, c})), codomain_p(t)), q2);
    }
    outer += std::pow(inner, q1 / q2);
  }
  return std::pow(outer, 1.0 / q1);
}

}  // namespace oracle
