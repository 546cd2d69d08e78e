#include <gtest/gtest.h>

#include "brute_force.hpp"
#include "srslab/enumeration.hpp"
#include "srslab/groups/symmetric.hpp"
#include "srslab/oracles.hpp"

using namespace srs;

namespace {

using BS = BaumslagSolitarGroup;
using SW = WreathProduct<SymmetricGroup, IntegerGroup>;

std::shared_ptr<const BS> bs23() { return std::make_shared<const BS>(2, 3); }

template <Group G>
std::vector<element_t<G>> parse_all(const G& g, std::initializer_list<const char*> texts) {
  std::vector<element_t<G>> out;
  for (auto t : texts) out.push_back(g.parse(t));
  return out;
}

template <Group G>
std::vector<std::string> format_all(const G& g, const std::vector<element_t<G>>& xs) {
  std::vector<std::string> out;
  for (const auto& x : xs) out.push_back(g.format(x));
  return out;
}

}  // namespace

TEST(WindowIntersect, BaumslagSolitarExamples) {
  auto g = bs23();
  auto h = bs_cyclic_a(g);
  Window<BS> q("q", parse_all(*g, {"a", "t", "at"}));
  EXPECT_EQ(format_all(*g, window_members(h, q)), (std::vector<std::string>{"a"}));

  auto k = h.conjugate(g->t());
  Window<BS> q2("q2", parse_all(*g, {"a", "a2", "a3"}));
  EXPECT_EQ(format_all(*g, window_members(k, q2)), (std::vector<std::string>{"a3"}));

  auto triv = trivial_subgroup(g);
  Window<BS> q3("q3", parse_all(*g, {"t", "e", "a"}));
  EXPECT_EQ(format_all(*g, window_members(triv, q3)), (std::vector<std::string>{"e"}));
}

TEST(WindowIntersect, DivisibilityCriterionForConjugate) {
  auto g = bs23();
  auto k = bs_cyclic_a(g).conjugate(g->t());
  for (std::int64_t e = -30; e <= 30; ++e) {
    EXPECT_EQ(k.contains(g->a(e)), from_bool(e % 3 == 0)) << e;
  }
}

TEST(NeighborhoodEqual, Examples) {
  auto g = bs23();
  auto h = bs_cyclic_a(g);
  auto k = h.conjugate(g->t());
  Window<BS> q("q", parse_all(*g, {"a", "t", "a3"}));
  EXPECT_EQ(neighborhood_equal(h, h, q), Membership::yes);
  EXPECT_EQ(neighborhood_equal(h, k, Window<BS>("a", {g->a()})), Membership::no);
  EXPECT_EQ(neighborhood_equal(h, k, Window<BS>("empty")), Membership::yes);
}

TEST(NeighborhoodEqual, MonotoneUnderShrinking) {
  auto g = bs23();
  auto h = bs_cyclic_a(g);
  Enumerator<BS> en(*g);
  auto big = en.prefix(300);
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    auto k = h.conjugate(big[rng.below(big.size())]);
    Window<BS> q("q"), qq("qq");
    for (const auto& x : big) {
      qq.insert(x);
      if (rng.below(2)) q.insert(x);
    }
    if (neighborhood_equal(h, k, qq) == Membership::yes) {
      EXPECT_EQ(neighborhood_equal(h, k, q), Membership::yes);
    }
  }
}

TEST(Conjugation, Coherence) {
  auto g = bs23();
  auto h = bs_cyclic_a(g);
  Enumerator<BS> en(*g);
  auto xs = en.prefix(200);
  Window<BS> q("q", xs);
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = xs[rng.below(xs.size())], b = xs[rng.below(xs.size())];
    auto lhs = h.conjugate(b).conjugate(a);
    auto rhs = h.conjugate(g->mul(a, b));
    EXPECT_EQ(window_intersect(lhs, q), window_intersect(rhs, q));
  }
}

TEST(NormalishWitnesses, CyclicSubgroupOfBaumslagSolitar) {
  auto g = bs23();
  auto h = bs_cyclic_a(g);
  Window<BS> probe("probe");
  for (std::int64_t k = -10; k <= 10; ++k) probe.insert(g->a(k));
  auto r = normalish_witnesses(h, {g->identity(), g->t()}, probe);
  std::vector<std::string> got = format_all(*g, r.witnesses);
  std::sort(got.begin(), got.end());
  std::vector<std::string> want = {"A3", "A6", "A9", "a3", "a6", "a9", "e"};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(got, want);
  EXPECT_EQ(r.undetermined, 0u);
  // Z = {e} gives probe n H.
  EXPECT_EQ(normalish_witnesses(h, {g->identity()}, probe).witnesses.size(), 21u);
}

TEST(ThompsonH, MembershipExamples) {
  ThompsonGroup F;
  auto f = ThompsonGroup::default_f();
  EXPECT_TRUE(thompson_h_membership(F.identity(), f));
  EXPECT_TRUE(thompson_h_membership(ThompsonGroup::shifted(f, 5), f));
  auto f2 = F.mul(f, f);
  auto g = F.mul(f, ThompsonGroup::shifted(f2, 1));
  EXPECT_TRUE(thompson_h_membership(g, f));
  EXPECT_FALSE(thompson_h_membership(F.mul(f, ThompsonGroup::translation(1)), f));
  auto d = thompson_h_decompose(g, ThompsonPowers(f));
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(*d, (std::map<std::int64_t, std::int64_t>{{0, 1}, {1, 2}}));
  // Compactly supported but not in H.
  EXPECT_FALSE(thompson_h_membership(F.mul(f, ThompsonGroup::shifted(ThompsonGroup::standard_b(), 0)), f));
  auto c = F.mul(F.mul(ThompsonGroup::standard_b(), f), F.inv(ThompsonGroup::standard_b()));
  EXPECT_FALSE(thompson_h_membership(c, f));
}

TEST(ThompsonH, RandomProductsDecompose) {
  ThompsonGroup F;
  auto f = ThompsonGroup::default_f();
  ThompsonPowers fp(f);
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::int64_t, std::int64_t> want;
    PLMap g;
    for (int i = 0; i < 6; ++i) {
      auto k = static_cast<std::int64_t>(rng.below(11)) - 5;
      auto j = static_cast<std::int64_t>(rng.below(7)) - 3;
      g = F.mul(g, ThompsonGroup::shifted(fp.power(j), k));
      want[k] += j;
    }
    for (auto it = want.begin(); it != want.end();) it = it->second == 0 ? want.erase(it) : std::next(it);
    auto d = thompson_h_decompose(g, fp);
    ASSERT_TRUE(d.has_value());
    EXPECT_EQ(*d, want);
    // A half-integer shift leaves H.
    if (!g.is_identity()) {
      PLMap half;
      half.pieces[0].q = Dyadic(mpz_class(1), 1);
      EXPECT_FALSE(thompson_h_membership(F.conj(half, g), fp));
    }
  }
}

TEST(ThompsonH, TranslationsNormalize) {
  auto F = std::make_shared<const ThompsonGroup>();
  auto h = thompson_h(F, ThompsonGroup::default_f());
  EXPECT_TRUE(h.normalized_by(ThompsonGroup::translation(-7)));
  EXPECT_FALSE(h.normalized_by(ThompsonGroup::standard_b()));
  auto k = h.conjugate(ThompsonGroup::translation(3));
  Window<ThompsonGroup> q("q");
  for (int s = -4; s <= 4; ++s) q.insert(ThompsonGroup::shifted(ThompsonGroup::default_f(), s));
  EXPECT_EQ(neighborhood_equal(h, k, q), Membership::yes);
}

TEST(ThompsonH, ConjugateShortcutAgreesWithDirectTest) {
  auto F = std::make_shared<const ThompsonGroup>();
  auto f = ThompsonGroup::default_f();
  auto h = thompson_h(F, f);
  ThompsonConjugateCache shortcut(std::make_shared<const ThompsonPowers>(f));
  Rng rng(77);
  auto gens = F->generators();
  std::size_t decided = 0;
  for (int trial = 0; trial < 300; ++trial) {
    PLMap w;
    for (std::uint64_t i = 0, n = rng.below(8); i < n; ++i) w = F->mul(w, gens[rng.below(gens.size())]);
    PLMap q;
    if (rng.below(2) == 0) {
      for (int i = 0; i < 3; ++i) {
        auto k = static_cast<std::int64_t>(rng.below(9)) - 4;
        auto j = static_cast<std::int64_t>(rng.below(5)) - 2;
        q = F->mul(q, ThompsonGroup::shifted(ThompsonPowers(f).power(j), k));
      }
    } else {
      for (std::uint64_t i = 0, n = rng.below(6); i < n; ++i) q = F->mul(q, gens[rng.below(gens.size())]);
    }
    auto base = h.contains(q);
    auto direct = h.contains(conjugate_by(*F, w, q));
    auto fast = shortcut(w, q, base);
    if (fast) {
      ++decided;
      EXPECT_EQ(*fast, direct);
    }
    EXPECT_EQ(h.conjugate_contains(w, q, base), direct);
    // Second query is answered from the cache.
    EXPECT_EQ(h.conjugate_contains(w, q, base), direct);
  }
  EXPECT_GT(decided, 120u);
}

TEST(WreathLimit, MembershipExamples) {
  SymmetricGroup s3(3);
  auto a = s3.transposition(1, 2);
  LampWindow<std::int64_t, Perm> id_conf;
  for (std::int64_t b = -2; b <= 2; ++b) id_conf.values.emplace(b, s3.identity());
  std::map<std::int64_t, Perm> x{{0, s3.transposition(1, 3)}};
  EXPECT_EQ(wreath_limit_membership(s3, x, id_conf, a), Membership::no);

  LampWindow<std::int64_t, Perm> conf = id_conf;
  conf.values[0] = s3.transposition(1, 3);
  std::map<std::int64_t, Perm> y{{0, s3.transposition(2, 3)}};
  EXPECT_EQ(wreath_limit_membership(s3, y, conf, a), Membership::yes);

  // c a c^{-1} is always a member.
  for (const auto& c : s3.elements()) {
    LampWindow<std::int64_t, Perm> cc;
    cc.values.emplace(4, c);
    std::map<std::int64_t, Perm> z{{4, s3.mul(c, s3.mul(a, s3.inv(c)))}};
    EXPECT_EQ(wreath_limit_membership(s3, z, cc, a), Membership::yes);
  }
  std::map<std::int64_t, Perm> far{{9, a}};
  EXPECT_EQ(wreath_limit_membership(s3, far, id_conf, a), Membership::undetermined);
}

TEST(WreathLimit, DiagonalOracle) {
  SymmetricGroup s3(3);
  auto w = std::make_shared<const SW>(s3, IntegerGroup{});
  LampWindow<std::int64_t, Perm> conf;
  for (std::int64_t b = -3; b <= 3; ++b) conf.values.emplace(b, s3.identity());
  auto h = wreath_diagonal(w, s3.transposition(1, 2), conf);
  EXPECT_EQ(h.contains(w->parse("{0:(12),2:(12)};0")), Membership::yes);
  EXPECT_EQ(h.contains(w->parse("{0:(12)};1")), Membership::no);
  EXPECT_EQ(h.contains(w->parse("{0:(23)};0")), Membership::no);
  EXPECT_EQ(h.contains(w->parse("{5:(12)};0")), Membership::undetermined);
  EXPECT_THROW(wreath_diagonal(w, s3.identity(), conf), std::invalid_argument);
}

TEST(PermWreath, SumOverMainOrbit) {
  SymmetricGroup s3(3);
  using PW = WreathProduct<SymmetricGroup, LatticeGroup, SheetAction>;
  auto w = std::make_shared<const PW>(s3, LatticeGroup(1), SheetAction{2});
  auto h = perm_wreath_sum(w, s3.transposition(1, 2));
  EXPECT_EQ(h.contains(w->parse("{(0)@0:(12),(4)@0:(12)};(0)")), Membership::yes);
  EXPECT_EQ(h.contains(w->parse("{(0)@1:(12)};(0)")), Membership::no);
  EXPECT_EQ(h.contains(w->parse("{(0)@0:(13)};(0)")), Membership::no);
  EXPECT_TRUE(h.normalized_by(w->parse("{(0)@1:(13)};(3)")));
  EXPECT_FALSE(h.normalized_by(w->parse("{(0)@0:(13)};(0)")));
}

TEST(Intersection, AndOfMembers) {
  auto g = bs23();
  auto h = bs_cyclic_a(g);
  auto both = SubgroupOracle<BS>::intersection({h, h.conjugate(g->t()), h.conjugate(g->t(-1))});
  // t<a>t^{-1} n <a> = <a^3>, t^{-1}<a>t n <a> = <a^2>.
  for (std::int64_t e = -20; e <= 20; ++e) EXPECT_EQ(both.contains(g->a(e)), from_bool(e % 6 == 0));
  EXPECT_EQ(both.contains(g->t()), Membership::no);
}

TEST(Trace, ConstantTrajectory) {
  auto g = bs23();
  auto h = bs_cyclic_a(g);
  Enumerator<BS> en(*g);
  TraceRecorder<BS> rec(h, {Window<BS>("Q1", en.prefix(16)), Window<BS>("Q2", en.prefix(32))});
  for (int i = 0; i < 50; ++i) rec.step(g->identity());
  auto traces = rec.finish();
  for (const auto& t : traces) {
    EXPECT_EQ(t.stabilization_index(), 0u);
    EXPECT_EQ(t.changes.size(), 1u);
    EXPECT_EQ(t.final_mask().size(), t.window_size);
  }
}

TEST(Trace, EventuallyConstantMatchesConjugate) {
  auto g = bs23();
  auto h = bs_cyclic_a(g);
  Enumerator<BS> en(*g);
  Window<BS> q("Q", en.prefix(64));
  TraceRecorder<BS> rec(h, {q});
  auto steps = parse_all(*g, {"t", "a", "T", "t", "t", "a2"});
  for (const auto& s : steps) rec.step(s);
  for (int i = 0; i < 20; ++i) rec.step(g->identity());
  auto t = rec.finish().front();
  EXPECT_LE(t.stabilization_index(), steps.size());
  auto k = h.conjugate(rec.product());
  std::string want;
  for (auto m : window_intersect(k, q)) want += to_char(m);
  EXPECT_EQ(t.final_mask(), want);
  auto w = g->identity();
  for (const auto& s : steps) w = g->mul(w, s);
  EXPECT_EQ(rec.product(), w);
}

TEST(Trace, NormalizerSkipsAgreeWithFullRecompute) {
  auto F = std::make_shared<const ThompsonGroup>();
  auto h = thompson_h(F, ThompsonGroup::default_f());
  Window<ThompsonGroup> q("Q");
  for (int s = -3; s <= 3; ++s) q.insert(ThompsonGroup::shifted(ThompsonGroup::default_f(), s));
  Enumerator<ThompsonGroup> en(*F);
  for (const auto& x : en.prefix(40)) q.insert(x);
  // Same oracle without the normalizer hint.
  SubgroupOracle<ThompsonGroup> plain(
      F, SubgroupFamily::thompson_h, "plain", [h](const PLMap& x) { return h.contains(x); });
  TraceRecorder<ThompsonGroup> fast(h, {q}), slow(plain, {q});
  Rng rng(2);
  auto gens = F->generators();
  for (int i = 0; i < 60; ++i) {
    const auto& s = gens[rng.below(gens.size())];
    fast.step(s);
    slow.step(s);
  }
  EXPECT_EQ(fast.product(), slow.product());
  EXPECT_GT(fast.skipped(), 0u);
  auto a = fast.finish().front(), b = slow.finish().front();
  EXPECT_EQ(a.changes, b.changes);
  EXPECT_EQ(fingerprint({a}), fingerprint({b}));
}

TEST(Trace, CsvAndHex) {
  EXPECT_EQ(WindowTrace::mask_hex("1000"), "1");
  EXPECT_EQ(WindowTrace::mask_hex("00011"), "81");
  EXPECT_EQ(WindowTrace::mask_hex("1?"), "1?1");
  WindowTrace t;
  t.label = "Q1";
  t.changes = {{0, "10"}, {7, "11"}};
  EXPECT_EQ(t.csv_rows(), "0,Q1,1,0\n7,Q1,3,1\n");
  EXPECT_EQ(t.at(3), "10");
  EXPECT_EQ(t.at(9), "11");
  EXPECT_TRUE(t.final_has_nonidentity(0));
  WindowTrace only_identity;
  only_identity.changes = {{0, "10"}};
  EXPECT_FALSE(only_identity.final_has_nonidentity(0));
}

// Small-scale brute-force agreement; the acceptance binary runs the full size.
TEST(BruteForce, BaumslagSolitarFamilies) {
  auto g = bs23();
  auto q = brute::words_window(*g, {g->a(), g->t()}, 6, "Q");
  auto h = bs_cyclic_a(g);
  auto ball = brute::word_ball(*g, {g->a()}, 12);
  for (const auto& x : q.elements()) {
    EXPECT_EQ(h.contains(x) == Membership::yes, ball.count(x) > 0) << g->format(x);
  }
}
