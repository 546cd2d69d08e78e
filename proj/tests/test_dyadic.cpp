#include <gtest/gtest.h>

#include "srslab/dyadic.hpp"
#include "srslab/random.hpp"

using srs::Dyadic;

namespace {

Dyadic random_dyadic(srs::Rng& rng) {
  long num = static_cast<long>(rng.below(2001)) - 1000;
  auto e = static_cast<std::int64_t>(rng.below(12));
  return Dyadic(mpz_class(num), e);
}

}  // namespace

TEST(Dyadic, CanonicalForm) {
  Dyadic x(mpz_class(6), 3);  // 6/8 = 3/4
  EXPECT_EQ(x.numerator(), 3);
  EXPECT_EQ(x.exponent(), 2);
  Dyadic zero(mpz_class(0), 7);
  EXPECT_EQ(zero.exponent(), 0);
  EXPECT_EQ(Dyadic(mpz_class(8), 3), Dyadic(1));
}

TEST(Dyadic, ArithmeticMatchesRationals) {
  srs::Rng rng(7);
  for (int i = 0; i < 5000; ++i) {
    Dyadic x = random_dyadic(rng), y = random_dyadic(rng);
    mpq_class qx = x.to_rational(), qy = y.to_rational();
    EXPECT_EQ((x + y).to_rational(), mpq_class(qx + qy));
    EXPECT_EQ((x - y).to_rational(), mpq_class(qx - qy));
    EXPECT_EQ((x * y).to_rational(), mpq_class(qx * qy));
    EXPECT_EQ(x < y, qx < qy);
    EXPECT_EQ(x == y, qx == qy);
    auto k = static_cast<std::int64_t>(rng.below(21)) - 10;
    mpq_class scaled = qx;
    if (k >= 0) {
      scaled *= mpq_class(mpz_class(1) << static_cast<mp_bitcnt_t>(k));
    } else {
      scaled /= mpq_class(mpz_class(1) << static_cast<mp_bitcnt_t>(-k));
    }
    EXPECT_EQ(x.scaled(k).to_rational(), scaled);
    // Structural equality with a freshly normalized copy.
    EXPECT_EQ(x.scaled(k), Dyadic(x.scaled(k).numerator(), x.scaled(k).exponent()));
    EXPECT_EQ(x * y, Dyadic((x * y).numerator(), (x * y).exponent()));
  }
}

// Pairs close in value, so the shifted numerators often have equal bit
// lengths and the comparison cannot stop early.
TEST(Dyadic, OrderingOfNearbyValues) {
  srs::Rng rng(8);
  for (int i = 0; i < 5000; ++i) {
    Dyadic x = random_dyadic(rng);
    Dyadic y = x + Dyadic(mpz_class(static_cast<long>(rng.below(5)) - 2), static_cast<std::int64_t>(rng.below(20)));
    mpq_class qx = x.to_rational(), qy = y.to_rational();
    EXPECT_EQ(x < y, qx < qy);
    EXPECT_EQ(y < x, qy < qx);
    EXPECT_EQ(x <= y, qx <= qy);
  }
}

TEST(Dyadic, ScalingStaysCanonical) {
  Dyadic two(2);
  EXPECT_EQ(two.scaled(-1), Dyadic(1));
  EXPECT_EQ(two.scaled(-1).exponent(), 0);
  EXPECT_EQ(Dyadic(mpz_class(3), 2).scaled(3), Dyadic(6));
}

TEST(Dyadic, FloorCeil) {
  Dyadic x(mpz_class(-5), 1);  // -2.5
  EXPECT_EQ(x.floor(), -3);
  EXPECT_EQ(x.ceil(), -2);
  EXPECT_EQ(Dyadic(4).floor(), 4);
}

TEST(Dyadic, RoundTrip) {
  srs::Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    Dyadic x = random_dyadic(rng);
    EXPECT_EQ(Dyadic::parse(x.str()), x);
  }
  EXPECT_EQ(Dyadic::parse("3/2^2").to_double(), 0.75);
  EXPECT_EQ(Dyadic::parse("-7"), Dyadic(-7));
  EXPECT_THROW(Dyadic::parse("1/3"), std::invalid_argument);
  EXPECT_THROW(Dyadic::parse("x"), std::invalid_argument);
}

TEST(Dyadic, ToDoubleHugeValues) {
  Dyadic big = Dyadic::pow2(2000);
  EXPECT_TRUE(std::isinf(big.to_double()));
  EXPECT_DOUBLE_EQ(Dyadic::pow2(-3).to_double(), 0.125);
}
