// Group axioms, serialization round trips and family-specific oracles.

#include <gtest/gtest.h>

#include <set>

#include "srslab/enumeration.hpp"
#include "srslab/groups/baumslag_solitar.hpp"
#include "srslab/groups/free_group.hpp"
#include "srslab/groups/integers.hpp"
#include "srslab/groups/symmetric.hpp"
#include "srslab/groups/thompson.hpp"
#include "srslab/groups/wreath.hpp"
#include "srslab/random.hpp"

using namespace srs;

namespace {

/// Product of `len` uniformly chosen generators.
template <Group G>
element_t<G> random_word(const G& g, Rng& rng, std::size_t len) {
  auto gens = g.generators();
  element_t<G> w = g.identity();
  for (std::size_t i = 0; i < len; ++i) w = g.mul(w, gens[rng.below(gens.size())]);
  return w;
}

template <Group G>
void check_axioms(const G& g, std::size_t trials, std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  auto e = g.identity();
  for (std::size_t i = 0; i < trials; ++i) {
    auto x = random_word(g, rng, 1 + rng.below(len));
    auto y = random_word(g, rng, 1 + rng.below(len));
    auto z = random_word(g, rng, 1 + rng.below(len));
    ASSERT_EQ(g.mul(g.mul(x, y), z), g.mul(x, g.mul(y, z))) << g.format(x);
    ASSERT_EQ(g.mul(x, e), x);
    ASSERT_EQ(g.mul(e, x), x);
    ASSERT_EQ(g.mul(x, g.inv(x)), e) << g.format(x);
    ASSERT_EQ(g.mul(g.inv(x), x), e);
    ASSERT_EQ(g.parse(g.format(x)), x) << g.format(x);
    ASSERT_EQ(conjugate_by(g, y, x), g.mul(g.inv(y), g.mul(x, y)));
    if (x == y) ASSERT_EQ(std::hash<element_t<G>>{}(x), std::hash<element_t<G>>{}(y));
  }
}

}  // namespace

TEST(Axioms, Integers) { check_axioms(IntegerGroup{}, 10000, 20, 1); }
TEST(Axioms, Lattice) { check_axioms(LatticeGroup(3), 10000, 20, 2); }
TEST(Axioms, Cyclic) { check_axioms(CyclicGroup(5), 10000, 20, 3); }
TEST(Axioms, Free) { check_axioms(FreeGroup(2), 10000, 12, 4); }
TEST(Axioms, Symmetric) { check_axioms(SymmetricGroup(4), 10000, 12, 5); }
TEST(Axioms, Wreath) {
  check_axioms(WreathProduct(SymmetricGroup(3), LatticeGroup(2)), 10000, 12, 6);
}
TEST(Axioms, PermutationalWreath) {
  check_axioms(WreathProduct(SymmetricGroup(3), LatticeGroup(2), SheetAction{2}), 3000, 12, 7);
}
TEST(Axioms, Thompson) { check_axioms(ThompsonGroup{}, 10000, 10, 8); }
TEST(Axioms, BaumslagSolitar23) { check_axioms(BaumslagSolitarGroup(2, 3), 10000, 12, 9); }
TEST(Axioms, BaumslagSolitar24) { check_axioms(BaumslagSolitarGroup(2, 4), 10000, 12, 10); }
TEST(Axioms, BaumslagSolitarNegative) { check_axioms(BaumslagSolitarGroup(-2, 3), 5000, 12, 11); }

TEST(Wreath, SpecProduct) {
  WreathProduct g(CyclicGroup(2), IntegerGroup{});
  auto x = g.mul(g.lamp(0, 1), g.shift(1));
  auto sq = g.mul(x, x);
  EXPECT_EQ(g.format(sq), "{0:1,1:1};2");
}

TEST(Wreath, SupportBound) {
  WreathProduct g(SymmetricGroup(3), LatticeGroup(3));
  Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    auto x = random_word(g, rng, 15), y = random_word(g, rng, 15);
    EXPECT_LE(g.mul(x, y).lamps.size(), x.lamps.size() + y.lamps.size());
  }
}

TEST(Wreath, InverseFormula) {
  WreathProduct g(SymmetricGroup(3), IntegerGroup{});
  auto a = SymmetricGroup(3).parse("(123)");
  auto x = g.mul(g.lamp(0, a), g.shift(4));
  auto xi = g.inv(x);
  // (b^{-1} . phi^{-1}, b^{-1}): lamp a^{-1} moves to -4.
  EXPECT_EQ(g.format(xi), "{-4:(132)};-4");
}

TEST(Wreath, ParseRejectsNonCanonical) {
  WreathProduct g(SymmetricGroup(3), LatticeGroup(2));
  EXPECT_THROW(g.parse("{(0,0):e};(0,0)"), std::invalid_argument);
  EXPECT_THROW(g.parse("{(0,0):(12),(0,0):(23)};(0,0)"), std::invalid_argument);
  EXPECT_EQ(g.format(g.parse("{(1,0):(12)};(0,1)")), "{(1,0):(12)};(0,1)");
}

TEST(Symmetric, CycleNotation) {
  SymmetricGroup s(3);
  auto p = s.parse("(12)");
  auto q = s.parse("(23)");
  // (12)(23) sends 1 -> 2 -> 3 -> 1.
  EXPECT_EQ(s.format(s.mul(p, q)), "(123)");
  EXPECT_EQ(s.elements().size(), 6u);
}

// Thompson: evaluation oracle.

namespace {

Dyadic random_point(Rng& rng) {
  long num = static_cast<long>(rng.below(1 << 14)) - (1 << 13);
  return Dyadic(mpz_class(num), static_cast<std::int64_t>(rng.below(8)));
}

}  // namespace

TEST(Thompson, DefaultFIsValid) {
  auto f = ThompsonGroup::default_f();
  EXPECT_EQ(f(Dyadic(mpz_class(3), 3)), Dyadic(mpz_class(1), 1));
  EXPECT_EQ(f(Dyadic(mpz_class(1), 1)), Dyadic(mpz_class(5), 3));
  EXPECT_TRUE(f.compactly_supported());
}

TEST(Thompson, CompositionMatchesPointwise) {
  ThompsonGroup g;
  Rng rng(20);
  for (int i = 0; i < 500; ++i) {
    auto x = random_word(g, rng, 1 + rng.below(10));
    auto y = random_word(g, rng, 1 + rng.below(10));
    auto xy = g.mul(x, y);
    auto xinv = g.inv(x);
    ThompsonGroup::validate(xy);
    ThompsonGroup::validate(xinv);
    EXPECT_EQ(xy.left_end().q, x.left_end().q + y.left_end().q);
    EXPECT_EQ(xy.right_end().q, x.right_end().q + y.right_end().q);
    for (int j = 0; j < 100; ++j) {
      auto p = random_point(rng);
      ASSERT_EQ(xy(p), x(y(p)));
      ASSERT_EQ(xinv(x(p)), p);
    }
  }
}

TEST(Thompson, FSquaredSlopes) {
  ThompsonGroup g;
  auto f = ThompsonGroup::default_f();
  auto ff = g.mul(f, f);
  Rng rng(21);
  for (int j = 0; j < 200; ++j) {
    auto p = random_point(rng);
    ASSERT_EQ(ff(p), f(f(p)));
  }
  std::vector<std::int64_t> slopes;
  for (const auto& piece : ff.pieces) slopes.push_back(piece.k);
  // 0 outside the support; inside, slopes 4, 2, 1/2, 1/4 (no slope-one piece survives).
  EXPECT_EQ(slopes, (std::vector<std::int64_t>{0, 2, 1, -1, -2, 0}));
}

TEST(Thompson, InverseHasNegatedSlopes) {
  auto f = ThompsonGroup::default_f();
  auto fi = inverse(f);
  ASSERT_EQ(fi.pieces.size(), f.pieces.size());
  for (std::size_t i = 0; i < f.pieces.size(); ++i) EXPECT_EQ(fi.pieces[i].k, -f.pieces[i].k);
  Rng rng(22);
  for (int j = 0; j < 100; ++j) {
    auto p = random_point(rng);
    EXPECT_EQ(f(fi(p)), p);
  }
}

TEST(Thompson, TranslationConjugation) {
  ThompsonGroup g;
  auto f = ThompsonGroup::default_f();
  auto t1 = ThompsonGroup::translation(1);
  auto c = g.mul(t1, g.mul(f, g.inv(t1)));
  EXPECT_EQ(c, ThompsonGroup::shifted(f, 1));
  ASSERT_EQ(c.bp.size(), f.bp.size());
  for (std::size_t i = 0; i < f.bp.size(); ++i) EXPECT_EQ(c.bp[i], f.bp[i] + Dyadic(1));
  EXPECT_TRUE(g.mul(t1, ThompsonGroup::translation(-1)).is_identity());
  EXPECT_EQ(g.mul(f, g.identity()), f);
}

TEST(Thompson, LocalConjugationMatchesGeneric) {
  ThompsonGroup g;
  Rng rng(23);
  auto f = ThompsonGroup::default_f();
  for (int i = 0; i < 500; ++i) {
    auto w = random_word(g, rng, 1 + rng.below(14));
    auto q = g.mul(ThompsonGroup::shifted(f, static_cast<std::int64_t>(rng.below(5)) - 2),
                   random_word(g, rng, 0));
    auto c = random_word(g, rng, 4);
    q = g.mul(g.inv(c), g.mul(q, c));
    EXPECT_EQ(g.conj(w, q), g.mul(g.inv(w), g.mul(q, w)));
  }
}

TEST(Thompson, ParseValidates) {
  ThompsonGroup g;
  EXPECT_THROW(g.parse("0:0|1/2^1|1:0"), std::invalid_argument);  // discontinuous
  EXPECT_THROW(g.parse("0:1/2^1"), std::invalid_argument);        // non-integer shift
  EXPECT_EQ(g.parse("0:0"), g.identity());
}

// Baumslag-Solitar: normal forms against an affine representation and relator
// insertion.

namespace {

/// a -> x + 1, t -> (n/m) x; words act by composition.
struct AffineRat {
  mpq_class slope{1}, offset{0};
  AffineRat after(const AffineRat& g) const {
    return {slope * g.slope, slope * g.offset + offset};
  }
};

AffineRat affine_of(const BaumslagSolitarGroup& g, const BSWord& w) {
  AffineRat r;
  AffineRat t{mpq_class(g.n(), g.m()), 0};
  t.slope.canonicalize();
  AffineRat tinv{1 / t.slope, 0};
  auto a_pow = [](std::int64_t k) { return AffineRat{1, mpq_class(k)}; };
  r = r.after(a_pow(w.exps[0]));
  for (std::size_t i = 0; i < w.signs.size(); ++i) {
    r = r.after(w.signs[i] > 0 ? t : tinv);
    r = r.after(a_pow(w.exps[i + 1]));
  }
  return r;
}

/// Raw letter sequence: +-1 for a^{+-1}, +-2 for t^{+-1}.
BSWord reduce_letters(const BaumslagSolitarGroup& g, const std::vector<int>& letters) {
  BSWord w;
  for (int l : letters) {
    if (l == 1 || l == -1) {
      g.append_a(w, l);
    } else {
      g.append_t(w, l / 2);
    }
  }
  return w;
}

}  // namespace

TEST(BaumslagSolitar, Relation) {
  BaumslagSolitarGroup g(2, 3);
  EXPECT_EQ(g.format(g.parse("ta2T")), "a3");
  EXPECT_EQ(g.format(g.parse("taT")), "taT");
  EXPECT_EQ(g.format(g.parse("Ta6t")), "a4");
  EXPECT_EQ(g.inv(g.parse("ta")), g.parse("AT"));
}

TEST(BaumslagSolitar, NormalFormConvention) {
  BaumslagSolitarGroup g(2, 3);
  for (int trial = 0; trial < 2000; ++trial) {
    Rng rng(static_cast<std::uint64_t>(trial));
    auto w = random_word(g, rng, 1 + rng.below(12));
    for (std::size_t i = 0; i < w.signs.size(); ++i) {
      auto k = w.exps[i];
      if (w.signs[i] > 0) {
        EXPECT_TRUE(k >= 0 && k < 3);
      } else {
        EXPECT_TRUE(k >= 0 && k < 2);
      }
      if (i > 0 && w.signs[i] == -w.signs[i - 1]) {
        // No pinch survives.
        if (w.signs[i - 1] > 0) {
          EXPECT_NE(k % 2, 0);
        } else {
          EXPECT_NE(k % 3, 0);
        }
      }
    }
  }
}

TEST(BaumslagSolitar, AffineRepresentationOracle) {
  for (auto [m, n] : {std::pair{2, 3}, std::pair{2, 4}, std::pair{3, 2}, std::pair{-2, 3}}) {
    BaumslagSolitarGroup g(m, n);
    Rng rng(31);
    for (int i = 0; i < 2000; ++i) {
      std::vector<int> letters;
      std::size_t len = 1 + rng.below(14);
      for (std::size_t j = 0; j < len; ++j) {
        static const int choices[] = {1, -1, 2, -2};
        letters.push_back(choices[rng.below(4)]);
      }
      auto w = reduce_letters(g, letters);
      // Direct composition of the raw letters.
      AffineRat direct;
      AffineRat t{mpq_class(n, m), 0};
      t.slope.canonicalize();
      for (int l : letters) {
        if (l == 1 || l == -1) direct = direct.after({1, mpq_class(l)});
        if (l == 2) direct = direct.after(t);
        if (l == -2) direct = direct.after({1 / t.slope, 0});
      }
      auto viaNf = affine_of(g, w);
      ASSERT_EQ(viaNf.slope, direct.slope);
      ASSERT_EQ(viaNf.offset, direct.offset);
    }
  }
}

TEST(BaumslagSolitar, RelatorInsertionGivesSameNormalForm) {
  for (auto [m, n] : {std::pair{2, 3}, std::pair{2, 4}, std::pair{3, 5}}) {
    BaumslagSolitarGroup g(m, n);
    Rng rng(32);
    for (int i = 0; i < 3000; ++i) {
      std::vector<int> letters;
      std::size_t len = 1 + rng.below(10);
      static const int choices[] = {1, -1, 2, -2};
      for (std::size_t j = 0; j < len; ++j) letters.push_back(choices[rng.below(4)]);
      auto base = reduce_letters(g, letters);
      // Insert a relator t a^m t^{-1} a^{-n}, its inverse, or a cancelling pair.
      auto pos = rng.below(letters.size() + 1);
      std::vector<int> ins;
      switch (rng.below(3)) {
        case 0:
          ins.push_back(2);
          for (int k = 0; k < std::abs(m); ++k) ins.push_back(m > 0 ? 1 : -1);
          ins.push_back(-2);
          for (int k = 0; k < std::abs(n); ++k) ins.push_back(n > 0 ? -1 : 1);
          break;
        case 1:
          for (int k = 0; k < std::abs(n); ++k) ins.push_back(n > 0 ? 1 : -1);
          ins.push_back(2);
          for (int k = 0; k < std::abs(m); ++k) ins.push_back(m > 0 ? -1 : 1);
          ins.push_back(-2);
          break;
        default: {
          int l = choices[rng.below(4)];
          ins = {l, -l};
        }
      }
      letters.insert(letters.begin() + static_cast<std::ptrdiff_t>(pos), ins.begin(), ins.end());
      ASSERT_EQ(reduce_letters(g, letters), base);
    }
  }
}

TEST(BaumslagSolitar, ReduceIsIdempotent) {
  BaumslagSolitarGroup g(2, 3);
  Rng rng(33);
  for (int i = 0; i < 10000; ++i) {
    auto w = random_word(g, rng, 1 + rng.below(12));
    std::vector<int> signs(w.signs.begin(), w.signs.end());
    ASSERT_EQ(g.reduce(w.exps, signs), w);
    ASSERT_EQ(g.mul(w, g.inv(w)), g.identity());
  }
}

TEST(BaumslagSolitar, OverflowThrows) {
  BaumslagSolitarGroup g(2, 3);
  auto w = g.a(std::numeric_limits<std::int64_t>::max());
  EXPECT_THROW(g.mul(w, g.a(1)), std::overflow_error);
}

// Enumeration.

TEST(Enumeration, IntegersSpiral) {
  Enumerator<IntegerGroup> e(IntegerGroup{});
  EXPECT_EQ(e.prefix(5), (std::vector<std::int64_t>{0, 1, -1, 2, -2}));
}

TEST(Enumeration, DistinctAndInverseClosed) {
  auto check = [](auto group, std::size_t count) {
    Enumerator e(group);
    auto pre = e.prefix(4 * count);
    using E = typename decltype(group)::element_type;
    std::unordered_set<E> seen(pre.begin(), pre.end());
    ASSERT_EQ(seen.size(), pre.size());
    ASSERT_EQ(pre.front(), group.identity());
    auto full_layers = e.length_of(pre.size() - 1);
    for (std::size_t i = 0; i < count && e.length_of(i) < full_layers; ++i) {
      EXPECT_TRUE(seen.count(group.inv(pre[i]))) << group.format(pre[i]);
    }
  };
  check(BaumslagSolitarGroup(2, 3), 200);
  check(ThompsonGroup{}, 200);
  check(WreathProduct(SymmetricGroup(3), LatticeGroup(3)), 200);
  check(FreeGroup(2), 200);
}

TEST(Enumeration, FiniteGroupExhausts) {
  Enumerator<SymmetricGroup> e(SymmetricGroup(3));
  EXPECT_EQ(e.prefix(100).size(), 6u);
  EXPECT_THROW(e.at(6), std::out_of_range);
}
