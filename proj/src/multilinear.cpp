#include "blocknorm/multilinear.hpp"

#include <cmath>
#include <functional>

#include "blocknorm/error.hpp"
#include "blocknorm/rng.hpp"

namespace blocknorm {

namespace {

std::size_t product(std::span<const std::size_t> dims) {
  std::size_t p = 1;
  for (std::size_t d : dims) p *= d;
  return p;
}

// Contracts the leading mode of a row-major tensor of shape (lead, rest...).
std::vector<double> contract_leading(const std::vector<double>& data, std::size_t lead,
                                     const Vector& x) {
  const std::size_t rest = data.size() / lead;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      view(data.data(), lead, rest);
  std::vector<double> out(rest);
  Eigen::Map<Vector>(out.data(), rest) = view.transpose() * x;
  return out;
}

// Contracts the trailing mode of a row-major tensor of shape (..., trail).
std::vector<double> contract_trailing(const std::vector<double>& data,
                                      std::size_t trail, const Vector& x) {
  const std::size_t rest = data.size() / trail;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      view(data.data(), rest, trail);
  std::vector<double> out(rest);
  Eigen::Map<Vector>(out.data(), rest) = view * x;
  return out;
}

// Replaces mode `mode` (extent dims[mode]) by M.rows(), applying M along it.
std::vector<double> mode_product(const std::vector<double>& data,
                                 std::vector<std::size_t>& dims, std::size_t mode,
                                 const Matrix& m) {
  const std::size_t outer = product(std::span(dims).first(mode));
  const std::size_t inner = product(std::span(dims).subspan(mode + 1));
  const std::size_t old_extent = dims[mode];
  const std::size_t new_extent = m.rows();
  std::vector<double> out(outer * new_extent * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t r = 0; r < new_extent; ++r) {
      double* dst = &out[(o * new_extent + r) * inner];
      for (std::size_t a = 0; a < old_extent; ++a) {
        const double w = m(r, a);
        if (w == 0.0) continue;
        const double* src = &data[(o * old_extent + a) * inner];
        for (std::size_t i = 0; i < inner; ++i) dst[i] += w * src[i];
      }
    }
  }
  dims[mode] = new_extent;
  return out;
}

}  // namespace

MultiOperator::MultiOperator(std::vector<LpSpace> domains, LpSpace codomain,
                             std::vector<double> coefficients)
    : domains_(std::move(domains)),
      codomain_(codomain),
      coefficients_(std::move(coefficients)) {
  if (domains_.empty()) throw InputError("an operator needs at least one slot");
  const std::size_t expected = product(shape());
  if (coefficients_.size() != expected) {
    throw InputError("operator tensor has " + std::to_string(coefficients_.size()) +
                     " coefficients, expected " + std::to_string(expected));
  }
}

MultiOperator MultiOperator::zero(std::vector<LpSpace> domains, LpSpace codomain) {
  std::size_t size = codomain.dim;
  for (const LpSpace& d : domains) size *= d.dim;
  return MultiOperator(std::move(domains), codomain, std::vector<double>(size, 0.0));
}

std::vector<std::size_t> MultiOperator::shape() const {
  std::vector<std::size_t> s;
  for (const LpSpace& d : domains_) s.push_back(d.dim);
  s.push_back(codomain_.dim);
  return s;
}

Vector MultiOperator::operator()(std::span<const Vector> xs) const {
  if (xs.size() != arity()) {
    throw InputError("operator of arity " + std::to_string(arity()) + " applied to " +
                     std::to_string(xs.size()) + " arguments");
  }
  std::vector<double> data = coefficients_;
  for (std::size_t k = 0; k < arity(); ++k) {
    if (static_cast<std::size_t>(xs[k].size()) != domains_[k].dim) {
      throw InputError("argument " + std::to_string(k + 1) + " does not live in " +
                       domains_[k].to_string());
    }
    data = contract_leading(data, domains_[k].dim, xs[k]);
  }
  return Eigen::Map<Vector>(data.data(), codomain_.dim);
}

MultiOperator MultiOperator::scaled(double factor) const {
  std::vector<double> c = coefficients_;
  for (double& v : c) v *= factor;
  return MultiOperator(domains_, codomain_, std::move(c));
}

MultiOperator MultiOperator::curry_first(const Vector& x) const {
  if (arity() < 2) throw InputError("curry_first needs an operator of arity >= 2");
  if (static_cast<std::size_t>(x.size()) != domains_[0].dim) {
    throw InputError("curried argument does not live in " + domains_[0].to_string());
  }
  return MultiOperator(std::vector<LpSpace>(domains_.begin() + 1, domains_.end()),
                       codomain_, contract_leading(coefficients_, domains_[0].dim, x));
}

Vector MultiOperator::slot_gradient(std::span<const Vector> xs, const Vector& psi,
                                    std::size_t slot) const {
  std::vector<double> data = contract_trailing(coefficients_, codomain_.dim, psi);
  for (std::size_t k = 0; k < slot; ++k) {
    data = contract_leading(data, domains_[k].dim, xs[k]);
  }
  for (std::size_t k = arity(); k-- > slot + 1;) {
    data = contract_trailing(data, domains_[k].dim, xs[k]);
  }
  return Eigen::Map<Vector>(data.data(), domains_[slot].dim);
}

LinearMap MultiOperator::partial_map(std::span<const Vector> xs, std::size_t slot) const {
  std::vector<double> data = coefficients_;
  for (std::size_t k = 0; k < slot; ++k) {
    data = contract_leading(data, domains_[k].dim, xs[k]);
  }
  // Remaining shape: m_slot, m_{slot+1}, ..., m_n, m_F. Contract the later
  // slots by moving the codomain out of the way one mode at a time.
  std::vector<std::size_t> dims;
  for (std::size_t k = slot; k < arity(); ++k) dims.push_back(domains_[k].dim);
  dims.push_back(codomain_.dim);
  for (std::size_t k = slot + 1; k < arity(); ++k) {
    Matrix row = xs[k].transpose();
    data = mode_product(data, dims, k - slot, row);
  }
  // Now shape m_slot x 1 x ... x 1 x m_F.
  Matrix m(codomain_.dim, domains_[slot].dim);
  for (std::size_t a = 0; a < domains_[slot].dim; ++a) {
    for (std::size_t c = 0; c < codomain_.dim; ++c) m(c, a) = data[a * codomain_.dim + c];
  }
  return LinearMap(domains_[slot], codomain_, std::move(m));
}

MultiOperator finite_type(const std::vector<Vec>& functionals, const Vec& b) {
  if (functionals.empty()) throw InputError("finite_type needs at least one functional");
  std::vector<LpSpace> domains;
  std::vector<double> data{1.0};
  for (const Vec& phi : functionals) {
    domains.push_back(phi.space);
    std::vector<double> next;
    next.reserve(data.size() * phi.coords.size());
    for (double d : data) {
      for (Eigen::Index i = 0; i < phi.coords.size(); ++i) next.push_back(d * phi.coords[i]);
    }
    data = std::move(next);
  }
  std::vector<double> coeffs;
  coeffs.reserve(data.size() * b.coords.size());
  for (double d : data) {
    for (Eigen::Index c = 0; c < b.coords.size(); ++c) coeffs.push_back(d * b.coords[c]);
  }
  return MultiOperator(std::move(domains), b.space, std::move(coeffs));
}

double functional_norm(const Vec& phi) {
  return lp_norm(phi.coords, dual_exponent(phi.space.exp));
}

MultiOperator compose(const LinearMap& v, const MultiOperator& t,
                      const std::vector<LinearMap>& us) {
  if (us.size() != t.arity()) {
    throw InputError("compose needs one inner map per slot");
  }
  if (!(v.domain() == t.codomain())) {
    throw InputError("outer map domain " + v.domain().to_string() +
                     " != operator codomain " + t.codomain().to_string());
  }
  std::vector<std::size_t> dims = t.shape();
  std::vector<double> data = t.coefficients();
  std::vector<LpSpace> domains;
  for (std::size_t k = 0; k < us.size(); ++k) {
    if (!(us[k].codomain() == t.domains()[k])) {
      throw InputError("inner map " + std::to_string(k + 1) + " lands in " +
                       us[k].codomain().to_string() + ", slot expects " +
                       t.domains()[k].to_string());
    }
    data = mode_product(data, dims, k, us[k].matrix().transpose());
    domains.push_back(us[k].domain());
  }
  data = mode_product(data, dims, us.size(), v.matrix());
  return MultiOperator(std::move(domains), v.codomain(), std::move(data));
}

std::vector<Vector> split_witness(const MultiOperator& t, const Vector& witness) {
  std::vector<Vector> xs;
  Eigen::Index offset = 0;
  for (const LpSpace& d : t.domains()) {
    xs.push_back(witness.segment(offset, d.dim));
    offset += d.dim;
  }
  return xs;
}

namespace {

constexpr double kMaxEnumeration = 2e7;
constexpr int kMaxSweeps = 500;

Vector concat(std::span<const Vector> xs) {
  Eigen::Index total = 0;
  for (const Vector& x : xs) total += x.size();
  Vector out(total);
  Eigen::Index offset = 0;
  for (const Vector& x : xs) {
    out.segment(offset, x.size()) = x;
    offset += x.size();
  }
  return out;
}

NormResult enumerate_vertices(const MultiOperator& t,
                              const std::vector<std::vector<Vector>>& vertices) {
  const std::size_t n = t.arity();
  std::vector<Vector> chosen(n);
  NormResult best{-1.0, true, Vector()};
  std::function<void(std::size_t, const std::vector<double>&)> recurse =
      [&](std::size_t slot, const std::vector<double>& data) {
        if (slot == n) {
          const double v = lp_norm(Eigen::Map<const Vector>(data.data(), data.size()),
                                   t.codomain().exp);
          if (v > best.value) best = {v, true, concat(chosen)};
          return;
        }
        for (const Vector& e : vertices[slot]) {
          chosen[slot] = e;
          recurse(slot + 1, contract_leading(data, t.domains()[slot].dim, e));
        }
      };
  recurse(0, t.coefficients());
  return best;
}

NormResult alternating_ascent(const MultiOperator& t, std::vector<Vector> xs) {
  const Exponent dual_cod = dual_exponent(t.codomain().exp);
  double value = lp_norm(t(xs), t.codomain().exp);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    std::vector<Vector> next = xs;
    for (std::size_t k = 0; k < t.arity(); ++k) {
      const Vector psi = norming_vector(t(next), dual_cod);
      next[k] = norming_vector(t.slot_gradient(next, psi, k), t.domains()[k].exp);
    }
    const double next_value = lp_norm(t(next), t.codomain().exp);
    if (!(next_value > value * (1.0 + 1e-15))) break;
    xs = std::move(next);
    value = next_value;
  }
  return {value, false, concat(xs)};
}

}  // namespace

NormResult sup_norm(const MultiOperator& t, const SearchOptions& options,
                    NormMethod method) {
  if (method == NormMethod::Auto) {
    std::vector<std::vector<Vector>> vertices;
    double count = 1.0;
    bool polytope = true;
    for (std::size_t k = 0; k < t.arity() && polytope; ++k) {
      // Only the first slot may be reduced modulo sign: ||T(-x, ...)|| = ||T(x, ...)||.
      auto v = ball_extreme_points(t.domains()[k], k == 0);
      if (!v) {
        polytope = false;
        break;
      }
      count *= static_cast<double>(v->size());
      vertices.push_back(std::move(*v));
    }
    if (polytope && count <= kMaxEnumeration) return enumerate_vertices(t, vertices);
  }

  NormResult best{-1.0, false, Vector()};
  auto consider = [&](NormResult r) {
    if (r.value > best.value) best = std::move(r);
  };
  {
    std::vector<Vector> xs;
    for (const LpSpace& d : t.domains()) {
      Vector ones = Vector::Ones(d.dim);
      xs.push_back(ones / lp_norm(ones, d.exp));
    }
    consider(alternating_ascent(t, std::move(xs)));
  }
  for (std::size_t r = 0; r < options.budget; ++r) {
    Rng rng(derive_seed(options.seed, {r}));
    std::normal_distribution<double> gauss;
    std::vector<Vector> xs;
    for (const LpSpace& d : t.domains()) {
      Vector x(d.dim);
      for (auto& c : x) c = gauss(rng);
      const double nx = lp_norm(x, d.exp);
      if (nx == 0.0) x[0] = 1.0;
      xs.push_back(nx == 0.0 ? x : Vector(x / nx));
    }
    consider(alternating_ascent(t, std::move(xs)));
  }
  best.exact = false;
  return best;
}

}  // namespace blocknorm
