#include <gtest/gtest.h>

#include <cmath>

#include "blocknorm/error.hpp"
#include "blocknorm/rng.hpp"
#include "blocknorm/sampling.hpp"
#include "blocknorm/spaces.hpp"
#include "oracles.hpp"

using namespace blocknorm;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(v.size());
  std::size_t i = 0;
  for (double c : v) x[i++] = c;
  return x;
}

}  // namespace

TEST(Exponent, RejectsBelowOneAndNonFinite) {
  EXPECT_THROW(Exponent(0.5), InputError);
  EXPECT_THROW(Exponent(std::nan("")), InputError);
  EXPECT_THROW(Exponent{INFINITY}, InputError);
  EXPECT_NO_THROW(Exponent(1.0));
}

TEST(Exponent, DualEndpointsAndInterior) {
  EXPECT_TRUE(dual_exponent(Exponent(1.0)).is_infinite());
  EXPECT_TRUE(dual_exponent(Exponent::infinity()).is_one());
  EXPECT_EQ(dual_exponent(Exponent(2.0)).value(), 2.0);
  EXPECT_NEAR(dual_exponent(Exponent(4.0 / 3.0)).value(), 4.0, 1e-12);
}

TEST(Exponent, DualIsAnInvolution) {
  for (double p : {1.0, 1.25, 1.5, 2.0, 3.0, 7.5}) {
    const Exponent back = dual_exponent(dual_exponent(Exponent(p)));
    EXPECT_NEAR(back.value(), p, 1e-12 * p);
  }
  EXPECT_TRUE(dual_exponent(dual_exponent(Exponent::infinity())).is_infinite());
}

TEST(LpSpace, RequiresPositiveDimension) {
  EXPECT_THROW(LpSpace(0, Exponent(2.0)), InputError);
  EXPECT_EQ(LpSpace(3, Exponent::infinity()).to_string(), "l_inf^3");
}

TEST(VecNorm, HandExamples) {
  EXPECT_DOUBLE_EQ(vec_norm(Vec(LpSpace(2, Exponent(2.0)), vec({3, 4}))), 5.0);
  EXPECT_DOUBLE_EQ(vec_norm(Vec(LpSpace(3, Exponent(1.0)), vec({1, -2, 3}))), 6.0);
  EXPECT_DOUBLE_EQ(vec_norm(Vec(LpSpace(3, Exponent::infinity()), vec({1, -2, 3}))), 3.0);
  EXPECT_THROW(Vec(LpSpace(2, Exponent(1.0)), vec({1, 2, 3})), InputError);
}

TEST(VecNorm, MatchesDirectFormulaAndNorms) {
  Rng rng(11);
  for (double p : {1.0, 1.5, 2.0, 3.0, 10.0}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Vector x = gaussian_vector(rng, 4);
      const Vector y = gaussian_vector(rng, 4);
      const Exponent e(p);
      EXPECT_NEAR(lp_norm(x, e), oracle::lp(x, p), 1e-12 * oracle::lp(x, p));
      EXPECT_LE(lp_norm(x + y, e), lp_norm(x, e) + lp_norm(y, e) + 1e-12);
      EXPECT_NEAR(lp_norm(-2.5 * x, e), 2.5 * lp_norm(x, e), 1e-12 * lp_norm(x, e));
    }
  }
}

TEST(VecNorm, LargeAndSmallEntriesDoNotOverflow) {
  const Vector big = vec({1e200, 1e200});
  EXPECT_NEAR(lp_norm(big, Exponent(3.0)) / 1e200, std::cbrt(2.0), 1e-12);
  const Vector tiny = vec({1e-200, 1e-200});
  EXPECT_NEAR(lp_norm(tiny, Exponent(3.0)) / 1e-200, std::cbrt(2.0), 1e-12);
}

TEST(DualBallExtremePoints, PolytopesAndSpheres) {
  auto cube = dual_ball_extreme_points(LpSpace(2, Exponent(1.0)));
  ASSERT_TRUE(cube);
  EXPECT_EQ(cube->size(), 4u);
  for (const Vector& v : *cube) EXPECT_EQ(v.cwiseAbs().minCoeff(), 1.0);

  auto cross = dual_ball_extreme_points(LpSpace(3, Exponent::infinity()));
  ASSERT_TRUE(cross);
  EXPECT_EQ(cross->size(), 6u);
  for (const Vector& v : *cross) EXPECT_EQ(v.cwiseAbs().sum(), 1.0);

  EXPECT_FALSE(dual_ball_extreme_points(LpSpace(2, Exponent(2.0))));
  auto half = dual_ball_extreme_points(LpSpace(3, Exponent(1.0)), true);
  ASSERT_TRUE(half);
  EXPECT_EQ(half->size(), 4u);
}

TEST(NormingVector, AttainsTheDualNorm) {
  Rng rng(5);
  for (double p : {1.0, 1.5, 2.0, 4.0}) {
    const Exponent e(p);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector g = gaussian_vector(rng, 3);
      const Vector x = norming_vector(g, e);
      EXPECT_NEAR(lp_norm(x, e), 1.0, 1e-12);
      EXPECT_NEAR(g.dot(x), lp_norm(g, dual_exponent(e)), 1e-12);
    }
  }
  const Vector g = vec({0.5, -2.0});
  EXPECT_NEAR(g.dot(norming_vector(g, Exponent::infinity())), 2.5, 1e-15);
}

TEST(LinearMapNorm, HandExample) {
  Matrix m(2, 2);
  m << 1, 0, 2, -3;
  const LpSpace l1(2, Exponent(1.0));
  const NormResult r = linear_map_norm(LinearMap(l1, l1, m));
  EXPECT_TRUE(r.exact);
  EXPECT_DOUBLE_EQ(r.value, 3.0);
}

TEST(LinearMapNorm, IdentityAndZero) {
  for (double p : {1.0, 2.0, 3.0}) {
    const LpSpace s(3, Exponent(p));
    const NormResult id = linear_map_norm(LinearMap::identity(s));
    EXPECT_GE(id.value, 1.0 - 1e-12);
    EXPECT_LE(id.value, 1.0 + 1e-12);
    EXPECT_EQ(id.exact, p == 1.0);
    EXPECT_EQ(linear_map_norm(LinearMap(s, s, Matrix::Zero(3, 3))).value, 0.0);
  }
}

TEST(LinearMapNorm, ExactModeDominatesEveryExtremePoint) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const LpSpace dom(3, random_exponent(rng, true));
    const LpSpace cod(2, random_exponent(rng));
    const LinearMap u = random_linear_map(rng, dom, cod);
    const NormResult r = linear_map_norm(u);
    ASSERT_TRUE(r.exact);
    double best = 0.0;
    for (const Vector& e : oracle::extreme_points(3, dom.exp.value())) {
      best = std::max(best, oracle::lp(u(e), cod.exp.value()));
    }
    EXPECT_NEAR(r.value, best, 1e-12 * best);
    EXPECT_NEAR(lp_norm(u(r.witness), cod.exp), r.value, 1e-12 * best);
  }
}

TEST(LinearMapNorm, AscentNeverExceedsExact) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const LpSpace dom(3, random_exponent(rng, true));
    const LinearMap u = random_linear_map(rng, dom, LpSpace(3, Exponent(2.0)));
    const NormResult exact = linear_map_norm(u);
    const NormResult ascent = linear_map_norm(u, {16, 3}, NormMethod::Ascent);
    EXPECT_FALSE(ascent.exact);
    EXPECT_LE(ascent.value, exact.value + 1e-12);
  }
}

TEST(LinearMapNorm, AscentIsSeedDeterministic) {
  Rng rng(2);
  const LinearMap u =
      random_linear_map(rng, LpSpace(4, Exponent(3.0)), LpSpace(3, Exponent(1.5)));
  const NormResult a = linear_map_norm(u, {8, 77});
  const NormResult b = linear_map_norm(u, {8, 77});
  EXPECT_EQ(a.value, b.value);
  EXPECT_FALSE(a.exact);
}

TEST(LinearMap, ShapeChecks) {
  const LpSpace a(2, Exponent(1.0));
  const LpSpace b(3, Exponent(1.0));
  EXPECT_THROW(LinearMap(a, b, Matrix::Zero(2, 3)), InputError);
  const LinearMap u(a, b, Matrix::Ones(3, 2));
  EXPECT_THROW(u.then(u), InputError);
}
