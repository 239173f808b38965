#include <gtest/gtest.h>

#include <random>

#include "ikalab/errors.hpp"
#include "ikalab/group_action.hpp"
#include "ikalab/rng.hpp"
#include "oracles.hpp"

using namespace ikalab;

namespace {

class BothBackends : public ::testing::TestWithParam<const char*> {
 protected:
  ActionParams params() const { return ActionParams::preset(GetParam()); }
};

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST(Presets, ModexpParameters) {
  const auto params = ActionParams::preset("modexp");
  EXPECT_EQ(params.modexp_params().p, 23u);
  EXPECT_EQ(params.order(), 11u);
  EXPECT_EQ(params.base(), SetPoint::residue(2));
  EXPECT_EQ(oracle::pow_naive(2, 11, 23), 1u);
}

TEST(Presets, EllipticCurveHasPrimeOrder) {
  const auto params = ActionParams::preset("elliptic");
  const oracle::ActionOracle o(params);
  EXPECT_EQ(o.curve().enumerate().size(), 19u);
  EXPECT_EQ(params.order(), 19u);
  EXPECT_EQ(o.act(19, params.base()), SetPoint::infinity());
}

TEST(Presets, DoublingTheEllipticBase) {
  const GroupAction action(ActionParams::preset("elliptic"));
  EXPECT_EQ(action.act(action.scalar(2), action.base()), SetPoint::affine(6, 3));
}

TEST(Presets, UnknownNameNamesBackend) {
  EXPECT_EQ(field_of([] { ActionParams::preset("rsa"); }), "backend");
}

TEST(Params, ModexpValidationNamesField) {
  EXPECT_EQ(field_of([] { ActionParams::modexp({.p = 21, .q = 11, .s = 2}); }), "p");
  EXPECT_EQ(field_of([] { ActionParams::modexp({.p = 23, .q = 7, .s = 2}); }), "q");
  EXPECT_EQ(field_of([] { ActionParams::modexp({.p = 23, .q = 11, .s = 5}); }), "s");
  EXPECT_EQ(field_of([] { ActionParams::modexp({.p = 23, .q = 11, .s = 1}); }), "s");
  EXPECT_NO_THROW(ActionParams::modexp({.p = 47, .q = 23, .s = 2}));
}

TEST(Params, EllipticValidationNamesField) {
  EXPECT_EQ(field_of([] { ActionParams::elliptic({.p = 17, .a = 0, .b = 0, .s = {5, 1}, .q = 19}); }), "a");
  EXPECT_EQ(field_of([] { ActionParams::elliptic({.p = 17, .a = 2, .b = 2, .s = {5, 2}, .q = 19}); }), "s");
  EXPECT_EQ(field_of([] { ActionParams::elliptic({.p = 17, .a = 2, .b = 2, .s = {5, 1}, .q = 17}); }), "q");
  EXPECT_EQ(field_of([] { ActionParams::elliptic({.p = 15, .a = 2, .b = 2, .s = {5, 1}, .q = 19}); }), "p");
}

TEST(Scalars, CheckedRange) {
  const GroupAction action(ActionParams::preset("modexp"));
  EXPECT_THROW(action.scalar(0), ContextError);
  EXPECT_THROW(action.scalar(11), ContextError);
  EXPECT_EQ(action.scalar(10).value, 10u);
  EXPECT_THROW(action.act(GroupScalar{11}, action.base()), ContextError);
}

TEST(Points, WrongBackendIsContextError) {
  const GroupAction modexp(ActionParams::preset("modexp"));
  const GroupAction elliptic(ActionParams::preset("elliptic"));
  EXPECT_THROW(modexp.act(modexp.scalar(2), elliptic.base()), ContextError);
  EXPECT_THROW(elliptic.act(elliptic.scalar(2), modexp.base()), ContextError);
}

TEST(Points, OutsideOrbitIsInvalid) {
  const GroupAction action(ActionParams::preset("modexp"));
  // 5 is a quadratic non-residue mod 23, so not in the order-11 subgroup.
  EXPECT_NE(oracle::pow_naive(5, 11, 23), 1u);
  EXPECT_FALSE(action.validate_point(SetPoint::residue(5)));
  EXPECT_THROW(action.act(action.scalar(3), SetPoint::residue(5)), InvalidPointError);
  EXPECT_FALSE(action.validate_point(SetPoint::residue(1)));
  EXPECT_FALSE(action.validate_point(SetPoint::residue(23)));

  const GroupAction curve(ActionParams::preset("elliptic"));
  EXPECT_FALSE(curve.validate_point(SetPoint::infinity()));
  EXPECT_FALSE(curve.validate_point(SetPoint::affine(5, 2)));
}

TEST(Points, EncodingRoundTrip) {
  for (const auto& p : {SetPoint::residue(16), SetPoint::affine(6, 3), SetPoint::infinity()}) {
    EXPECT_EQ(SetPoint::decode(p.encode()), p);
  }
  EXPECT_EQ(SetPoint::affine(6, 3).encode(), "6,3");
  EXPECT_THROW(SetPoint::decode("6;3"), InvalidPointError);
  EXPECT_THROW(SetPoint::decode(""), InvalidPointError);
  const GroupAction action(ActionParams::preset("modexp"));
  EXPECT_THROW(action.decode_point("5"), InvalidPointError);
}

TEST(Orbit, ModexpHasTenPoints) {
  const oracle::ActionOracle o(ActionParams::preset("modexp"));
  EXPECT_EQ(o.orbit().size(), 10u);
}

TEST(Orbit, EllipticHasEighteenPoints) {
  const oracle::ActionOracle o(ActionParams::preset("elliptic"));
  EXPECT_EQ(o.orbit().size(), 18u);
}

TEST_P(BothBackends, ActMatchesOracleExhaustively) {
  const GroupAction action(params());
  const oracle::ActionOracle o(params());
  for (const auto& x : o.orbit()) {
    EXPECT_TRUE(action.validate_point(x)) << x.encode();
    for (std::uint64_t g = 1; g < o.q(); ++g) {
      EXPECT_EQ(action.act(action.scalar(g), x), o.act(g, x)) << g << " . " << x.encode();
    }
  }
}

TEST_P(BothBackends, ScalarArithmeticMatchesOracle) {
  const GroupAction action(params());
  const oracle::ActionOracle o(params());
  for (std::uint64_t g = 1; g < o.q(); ++g) {
    EXPECT_EQ(action.invert(action.scalar(g)).value, o.inverse(g));
    for (std::uint64_t h = 1; h < o.q(); ++h) {
      EXPECT_EQ(action.compose(action.scalar(g), action.scalar(h)).value, o.product({g, h}));
    }
  }
  const std::vector<GroupScalar> factors{action.scalar(3), action.scalar(4), action.scalar(5)};
  EXPECT_EQ(action.product(factors).value, o.product({3, 4, 5}));
  EXPECT_EQ(action.product({}).value, 1u);
}

// Identity, compatibility, inverse cancellation and commutation on random
// triples, with a generator independent of the library's Rng.
TEST_P(BothBackends, ActionAxiomsOnRandomTriples) {
  const GroupAction action(params());
  const oracle::ActionOracle o(params());
  const auto orbit = o.orbit();
  std::mt19937_64 gen(20240611);
  std::uniform_int_distribution<std::uint64_t> scalar(1, o.q() - 1);
  std::uniform_int_distribution<std::size_t> point(0, orbit.size() - 1);
  for (int trial = 0; trial < 1000; ++trial) {
    const GroupScalar g = action.scalar(scalar(gen));
    const GroupScalar h = action.scalar(scalar(gen));
    const SetPoint x = orbit[point(gen)];
    ASSERT_EQ(action.act(action.identity(), x), x);
    ASSERT_EQ(action.act(action.compose(g, h), x), action.act(g, action.act(h, x)));
    ASSERT_EQ(action.act(action.invert(g), action.act(g, x)), x);
    ASSERT_EQ(action.act(g, action.act(h, x)), action.act(h, action.act(g, x)));
  }
}

TEST_P(BothBackends, RandomDrawsStayInRange) {
  const GroupAction action(params());
  Rng rng(7, 1);
  for (int i = 0; i < 500; ++i) {
    const auto g = action.random_nonidentity_scalar(rng);
    ASSERT_GE(g.value, 2u);
    ASSERT_LT(g.value, action.order());
    ASSERT_TRUE(action.validate_point(action.random_orbit_point(rng, action.base())));
  }
}

INSTANTIATE_TEST_SUITE_P(Presets, BothBackends, ::testing::Values("modexp", "elliptic"));

TEST(Rng, SameSeedAndStreamRepeat) {
  Rng a(42, 3);
  Rng b(42, 3);
  Rng c(42, 4);
  std::vector<std::uint64_t> xa, xb, xc;
  for (int i = 0; i < 32; ++i) {
    xa.push_back(a.uniform(1, 1000));
    xb.push_back(b.uniform(1, 1000));
    xc.push_back(c.uniform(1, 1000));
  }
  EXPECT_EQ(xa, xb);
  EXPECT_NE(xa, xc);
}

TEST(Rng, UniformCoversRangeEnds) {
  Rng rng(1);
  bool lo = false;
  bool hi = false;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.uniform(2, 10);
    ASSERT_GE(v, 2u);
    ASSERT_LE(v, 10u);
    lo = lo || v == 2;
    hi = hi || v == 10;
  }
  EXPECT_TRUE(lo && hi);
}

TEST(IsPrime, SmallValues) {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t n = 0; n < 30; ++n) {
    if (is_prime(n)) primes.push_back(n);
  }
  EXPECT_EQ(primes, (std::vector<std::uint64_t>{2, 3, 5, 7, 11, 13, 17, 19, 23, 29}));
}
