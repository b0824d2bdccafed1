#include "blocknorm/spaces.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "blocknorm/error.hpp"
#include "blocknorm/rng.hpp"

namespace blocknorm {

Exponent::Exponent(double p) : infinite_(false), value_(p) {
  if (!std::isfinite(p) || p < 1.0) {
    throw InputError("exponent must be a finite number >= 1 or infinity, got " +
                     std::to_string(p));
  }
}

Exponent Exponent::infinity() {
  Exponent e;
  e.infinite_ = true;
  e.value_ = 0.0;
  return e;
}

double Exponent::value() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : value_;
}

std::string Exponent::to_string() const {
  if (infinite_) return "inf";
  std::ostringstream out;
  out.precision(17);
  out << value_;
  return out.str();
}

Exponent dual_exponent(Exponent p) {
  if (p.is_infinite()) return Exponent(1.0);
  if (p.is_one()) return Exponent::infinity();
  const double v = p.value();
  if (v == 2.0) return p;
  return Exponent(v / (v - 1.0));
}

LpSpace::LpSpace(std::size_t dim, Exponent exp) : dim(dim), exp(exp) {
  if (dim == 0) throw InputError("space dimension must be positive");
}

std::string LpSpace::to_string() const {
  return "l_" + exp.to_string() + "^" + std::to_string(dim);
}

Vec::Vec(LpSpace space, Vector coords) : space(space), coords(std::move(coords)) {
  if (static_cast<std::size_t>(this->coords.size()) != space.dim) {
    throw InputError("vector of length " + std::to_string(this->coords.size()) +
                     " does not live in " + space.to_string());
  }
}

double lp_norm(const Vector& x, Exponent p) {
  if (x.size() == 0) return 0.0;
  if (p.is_infinite()) return x.cwiseAbs().maxCoeff();
  if (p.is_one()) return x.cwiseAbs().sum();
  const double pv = p.value();
  if (pv == 2.0) return std::sqrt(x.squaredNorm());
  const double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sum += std::pow(std::abs(x[i]) / scale, pv);
  }
  return scale * std::pow(sum, 1.0 / pv);
}

double vec_norm(const Vec& x) { return lp_norm(x.coords, x.space.exp); }

namespace {

std::vector<Vector> signed_basis(std::size_t dim, bool up_to_sign) {
  std::vector<Vector> points;
  for (std::size_t i = 0; i < dim; ++i) {
    Vector e = Vector::Zero(dim);
    e[i] = 1.0;
    points.push_back(e);
    if (!up_to_sign) points.push_back(-e);
  }
  return points;
}

std::vector<Vector> sign_vectors(std::size_t dim, bool up_to_sign) {
  // Bit i of the mask set means coordinate i is -1. Fixing coordinate 0 to
  // +1 picks one representative of every +/- pair.
  const std::size_t count = std::size_t{1} << dim;
  std::vector<Vector> points;
  for (std::size_t mask = 0; mask < count; ++mask) {
    if (up_to_sign && (mask & 1U)) continue;
    Vector v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = (mask >> i) & 1U ? -1.0 : 1.0;
    points.push_back(v);
  }
  return points;
}

}  // namespace

std::optional<std::vector<Vector>> ball_extreme_points(const LpSpace& space,
                                                       bool up_to_sign) {
  if (space.dim == 1 || space.exp.is_one()) {
    return signed_basis(space.dim, up_to_sign);
  }
  if (space.exp.is_infinite()) {
    if (space.dim > 20) return std::nullopt;
    return sign_vectors(space.dim, up_to_sign);
  }
  return std::nullopt;
}

std::optional<std::vector<Vector>> dual_ball_extreme_points(const LpSpace& space,
                                                            bool up_to_sign) {
  return ball_extreme_points(space.dual(), up_to_sign);
}

Vector norming_vector(const Vector& g, Exponent p) {
  const Eigen::Index n = g.size();
  Vector x = Vector::Zero(n);
  if (n == 0) return x;
  const double gmax = g.cwiseAbs().maxCoeff();
  if (gmax == 0.0) {
    x[0] = 1.0;
    return x;
  }
  if (p.is_one()) {
    Eigen::Index best = 0;
    g.cwiseAbs().maxCoeff(&best);
    x[best] = g[best] < 0.0 ? -1.0 : 1.0;
    return x;
  }
  if (p.is_infinite()) {
    for (Eigen::Index i = 0; i < n; ++i) x[i] = g[i] < 0.0 ? -1.0 : 1.0;
    return x;
  }
  const double q = dual_exponent(p).value();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::abs(g[i]) / gmax;
    const double mag = a == 0.0 ? 0.0 : std::pow(a, q - 1.0);
    x[i] = g[i] < 0.0 ? -mag : mag;
  }
  return x / lp_norm(x, p);
}

LinearMap::LinearMap(LpSpace domain, LpSpace codomain, Matrix matrix)
    : domain_(domain), codomain_(codomain), matrix_(std::move(matrix)) {
  if (static_cast<std::size_t>(matrix_.rows()) != codomain_.dim ||
      static_cast<std::size_t>(matrix_.cols()) != domain_.dim) {
    throw InputError("linear map matrix is " + std::to_string(matrix_.rows()) +
                     "x" + std::to_string(matrix_.cols()) + ", expected " +
                     std::to_string(codomain_.dim) + "x" +
                     std::to_string(domain_.dim));
  }
}

LinearMap LinearMap::identity(const LpSpace& space) {
  return LinearMap(space, space, Matrix::Identity(space.dim, space.dim));
}

Vector LinearMap::operator()(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != domain_.dim) {
    throw InputError("linear map applied to a vector of the wrong length");
  }
  return matrix_ * x;
}

LinearMap LinearMap::then(const LinearMap& v) const {
  if (!(v.domain() == codomain_)) {
    throw InputError("composition: " + v.domain().to_string() +
                     " != " + codomain_.to_string());
  }
  return LinearMap(domain_, v.codomain(), v.matrix() * matrix_);
}

namespace {

constexpr int kMaxAscentSteps = 500;

NormResult ascent_from(const LinearMap& u, Vector x) {
  const Exponent dual_cod = dual_exponent(u.codomain().exp);
  double value = lp_norm(u.matrix() * x, u.codomain().exp);
  for (int step = 0; step < kMaxAscentSteps; ++step) {
    const Vector psi = norming_vector(u.matrix() * x, dual_cod);
    const Vector next = norming_vector(u.matrix().transpose() * psi, u.domain().exp);
    const double next_value = lp_norm(u.matrix() * next, u.codomain().exp);
    if (!(next_value > value * (1.0 + 1e-15))) break;
    x = next;
    value = next_value;
  }
  return {value, false, x};
}

}  // namespace

NormResult linear_map_norm(const LinearMap& u, const SearchOptions& options,
                           NormMethod method) {
  if (method == NormMethod::Auto) {
    if (auto vertices = ball_extreme_points(u.domain(), true)) {
      NormResult best{0.0, true, (*vertices)[0]};
      for (const Vector& e : *vertices) {
        const double v = lp_norm(u.matrix() * e, u.codomain().exp);
        if (v > best.value) best = {v, true, e};
      }
      return best;
    }
  }

  const std::size_t dim = u.domain().dim;
  NormResult best{0.0, false, Vector::Zero(dim)};
  best.witness[0] = 1.0;
  auto consider = [&](NormResult r) {
    if (r.value > best.value) best = std::move(r);
  };
  for (std::size_t i = 0; i < dim; ++i) {
    Vector e = Vector::Zero(dim);
    e[i] = 1.0;
    consider(ascent_from(u, e));
  }
  for (std::size_t r = 0; r < options.budget; ++r) {
    Rng rng(derive_seed(options.seed, {r}));
    std::normal_distribution<double> gauss;
    Vector x(dim);
    for (auto& c : x) c = gauss(rng);
    const double n = lp_norm(x, u.domain().exp);
    if (n == 0.0) continue;
    consider(ascent_from(u, x / n));
  }
  best.exact = false;
  return best;
}

}  // namespace blocknorm
