#include <gtest/gtest.h>

#include "blocknorm/error.hpp"
#include "blocknorm/sampling.hpp"
#include "blocknorm/serialize.hpp"

using namespace blocknorm;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Serialize, ExponentRoundTrip) {
  for (const Exponent& p : {Exponent(1.0), Exponent(2.5), Exponent::infinity()}) {
    EXPECT_EQ(exponent_from_json(to_json(p), "$"), p);
  }
  EXPECT_EQ(to_json(Exponent::infinity()), json("inf"));
  EXPECT_NE(error_of([] { exponent_from_json(json(0.5), "$.p"); }).find("$.p"), std::string::npos);
  EXPECT_FALSE(error_of([] { exponent_from_json(json("two"), "$.p"); }).empty());
}

TEST(Serialize, SpaceRoundTrip) {
  const LpSpace s(3, Exponent::infinity());
  EXPECT_EQ(space_from_json(to_json(s), "$"), s);
  EXPECT_FALSE(error_of([] { space_from_json(json{{"dim", 0}, {"p", 2}}, "$.spaces.A"); }).empty());
  EXPECT_NE(error_of([] { space_from_json(json{{"p", 2}}, "$.spaces.A"); }).find("dim"),
            std::string::npos);
}

TEST(Serialize, SequenceRoundTrip) {
  Rng rng(1);
  const LpSpace s(2, Exponent(2.0));
  const VecSequence seq = random_sequence(rng, s, 3);
  const VecSequence back = sequence_from_json(to_json(seq), s, "$");
  ASSERT_EQ(back.entries.size(), 3u);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(back.entries[j], seq.entries[j]);
  const std::string err = error_of([&] { sequence_from_json(json{{1.0, 2.0, 3.0}}, s, "$.seq"); });
  EXPECT_NE(err.find("$.seq[0]"), std::string::npos) << err;
}

TEST(Serialize, ClassForms) {
  EXPECT_EQ(class_from_json("strong(2)", "$"), ClassSpec::strong(2));
  EXPECT_EQ(class_from_json("weak(1.5)", "$"), ClassSpec::weak(1.5));
  EXPECT_EQ(class_from_json("sup", "$"), ClassSpec::sup());
  EXPECT_EQ(class_from_json("strong(inf)", "$"), ClassSpec::sup());
  EXPECT_EQ(class_from_json("weak(inf)", "$"), ClassSpec::sup());
  EXPECT_EQ(class_from_json(json{{"kind", "weak"}, {"p", 3}}, "$"), ClassSpec::weak(3));
  for (const ClassSpec& c : {ClassSpec::strong(1), ClassSpec::weak(2.5), ClassSpec::sup()}) {
    EXPECT_EQ(class_from_json(to_json(c), "$"), c);
  }
  EXPECT_FALSE(error_of([] { class_from_json("strong(0.5)", "$"); }).empty());
  EXPECT_FALSE(error_of([] { class_from_json("medium(2)", "$"); }).empty());
}

TEST(Serialize, BlockRoundTripIsOneBased) {
  const Block e = Block::explicit_set({2, 3}, {{0, 2}, {1, 0}});
  const json j = to_json(e);
  EXPECT_EQ(j["members"][0], json({1, 3}));
  const Block back = block_from_json(j, "$");
  EXPECT_EQ(back.members(), e.members());
  const Block eq = Block::equality(0, 2, {2, 2, 3});
  EXPECT_EQ(to_json(eq)["positions"], json({1, 3}));
  EXPECT_EQ(block_from_json(to_json(eq), "$").members(), eq.members());
  for (const Block& b : {Block::full({2, 2}), Block::diagonal({3, 2})}) {
    EXPECT_EQ(block_from_json(to_json(b), "$").members(), b.members());
  }
}

TEST(Serialize, BlockErrorsNameTheTuple) {
  const json j = {{"kind", "explicit"}, {"bounds", {2, 2}}, {"members", {{1, 1}, {3, 1}}}};
  const std::string err = error_of([&] { block_from_json(j, "$.blocks.B"); });
  EXPECT_NE(err.find("$.blocks.B.members[1]"), std::string::npos) << err;
  EXPECT_NE(err.find("[3,1]"), std::string::npos) << err;
  EXPECT_FALSE(error_of([] { block_from_json(json{{"kind", "full"}, {"bounds", {0}}}, "$"); }).empty());
  EXPECT_FALSE(error_of([] { block_from_json(json{{"kind", "ring"}, {"bounds", {2}}}, "$"); }).empty());
}

TEST(Serialize, TensorRoundTrip) {
  Rng rng(2);
  const LpSpace a(2, Exponent(1.0)), b(3, Exponent(2.0)), f(2, Exponent(1.0));
  const MultiOperator t = random_operator(rng, {a, b}, f);
  const std::vector<double> back = tensor_from_json(tensor_to_json(t), t.shape(), "$");
  EXPECT_EQ(back, t.coefficients());
  const std::string err = error_of([&] { tensor_from_json(json{{1, 2}}, t.shape(), "$.t"); });
  EXPECT_NE(err.find("$.t"), std::string::npos) << err;
}
