#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "srslab/bass_serre.hpp"
#include "srslab/random.hpp"

using namespace srs;

namespace {

std::set<std::string> names(const BassSerreTree& t, const std::vector<TreeVertex>& vs) {
  std::set<std::string> out;
  for (const auto& v : vs) out.insert(t.group().format(v));
  return out;
}

BSWord random_word(const BaumslagSolitarGroup& g, Rng& rng, std::size_t len) {
  auto gens = g.generators();
  BSWord w = g.identity();
  for (std::size_t i = 0; i < len; ++i) w = g.mul(w, gens[rng.below(gens.size())]);
  return w;
}

/// 1 + d sum_{i<r} (d-1)^i.
std::size_t regular_ball_size(std::size_t d, std::size_t r) {
  std::size_t total = 1, shell = d;
  for (std::size_t i = 0; i < r; ++i) {
    total += shell;
    shell *= d - 1;
  }
  return total;
}

}  // namespace

TEST(Tree, NeighborsOfRoot) {
  BassSerreTree t(BaumslagSolitarGroup(2, 3));
  auto nb = t.neighbors(t.root());
  ASSERT_EQ(nb.size(), 5u);
  std::vector<TreeVertex> out, in;
  for (const auto& e : nb) (e.sign > 0 ? out : in).push_back(e.to);
  EXPECT_EQ(names(t, out), (std::set<std::string>{"t", "at", "a2t"}));
  EXPECT_EQ(names(t, in), (std::set<std::string>{"T", "aT"}));
  // Distinct cosets: u^{-1} v is never a power of a.
  const auto& g = t.group();
  for (std::size_t i = 0; i < nb.size(); ++i) {
    for (std::size_t j = i + 1; j < nb.size(); ++j) {
      EXPECT_FALSE(g.mul(g.inv(nb[i].to), nb[j].to).is_power_of_a());
    }
  }
}

TEST(Tree, AdjacencyIsSymmetric) {
  for (auto [m, n] : {std::pair{2, 3}, {2, 4}, {-2, 3}, {3, -5}}) {
    BassSerreTree t(BaumslagSolitarGroup(m, n));
    auto b = t.ball(t.root(), 3);
    for (const auto& v : b.vertices) {
      auto nb = t.neighbors(v);
      EXPECT_EQ(nb.size(), static_cast<std::size_t>(std::abs(m) + std::abs(n)));
      for (const auto& e : nb) {
        bool back = false;
        for (const auto& f : t.neighbors(e.to)) back = back || f.to == v;
        EXPECT_TRUE(back);
        EXPECT_EQ(t.distance(v, e.to), 1u);
      }
    }
  }
}

TEST(Tree, BallsAreTrees) {
  for (auto [m, n] : {std::pair{2, 3}, {2, 4}, {3, 5}, {-2, 3}}) {
    BassSerreTree t(BaumslagSolitarGroup(m, n));
    auto b = t.ball(t.root(), 4);
    EXPECT_FALSE(b.cycle_found);
    EXPECT_EQ(b.vertices.size(), b.edges + 1);
    EXPECT_EQ(b.vertices.size(), regular_ball_size(static_cast<std::size_t>(std::abs(m) + std::abs(n)), 4));
    // BFS depth agrees with the normal-form distance.
    for (std::size_t i = 0; i < b.vertices.size(); ++i) {
      EXPECT_EQ(t.distance(t.root(), b.vertices[i]), b.depth[i]);
    }
  }
}

TEST(Tree, HeightChangesByOneAcrossEdges) {
  BassSerreTree t(BaumslagSolitarGroup(2, 3));
  const auto& g = t.group();
  EXPECT_EQ(t.height(t.root()), 0);
  EXPECT_EQ(t.height(t.vertex(g.t())), 1);
  EXPECT_EQ(t.height(t.vertex(g.parse("aT"))), -1);
  auto b = t.ball(t.root(), 4);
  for (const auto& v : b.vertices) {
    for (const auto& e : t.neighbors(v)) EXPECT_EQ(t.height(e.to) - t.height(v), e.sign);
  }
  // Well defined on cosets.
  EXPECT_EQ(t.vertex(g.parse("ta5")), t.vertex(g.t()));
}

TEST(Tree, ActionPreservesAdjacency) {
  BassSerreTree t(BaumslagSolitarGroup(2, 3));
  const auto& g = t.group();
  EXPECT_EQ(t.act(g.a(), t.root()), t.root());
  EXPECT_NE(t.act(g.t(), t.root()), t.root());
  auto b = t.ball(t.root(), 3);
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    BSWord x = random_word(g, rng, 1 + rng.below(8));
    const auto& v = b.vertices[rng.below(b.vertices.size())];
    auto nb = t.neighbors(v);
    const auto& u = nb[rng.below(nb.size())].to;
    auto xv = t.act(x, v), xu = t.act(x, u);
    bool found = false;
    for (const auto& e : t.neighbors(xv)) found = found || e.to == xu;
    EXPECT_TRUE(found);
    EXPECT_EQ(std::abs(t.height(xv) - t.height(xu)), 1);
  }
}

TEST(Tree, GeodesicAndCsv) {
  BassSerreTree t(BaumslagSolitarGroup(2, 3));
  const auto& g = t.group();
  auto v = t.vertex(g.parse("taTat"));
  auto path = t.geodesic(t.root(), v);
  ASSERT_EQ(path.size(), 4u);
  for (std::size_t i = 1; i < path.size(); ++i) EXPECT_TRUE(t.adjacent(path[i - 1], path[i]));
  auto csv = t.ball_csv(t.ball(t.root(), 1));
  EXPECT_EQ(csv,
            "parent,child,edge,height\n"
            "e,t,l=0,1\ne,at,l=1,1\ne,a2t,l=2,1\ne,T,j=0,-1\ne,aT,j=1,-1\n");
}

TEST(Classify, KnownElements) {
  BassSerreTree t(BaumslagSolitarGroup(2, 3));
  const auto& g = t.group();
  auto c = t.classify(g.a(5), t.root(), 4);
  ASSERT_TRUE(std::holds_alternative<Elliptic>(c));
  EXPECT_EQ(std::get<Elliptic>(c).fixed, t.root());
  auto l = t.classify(g.t(), t.root(), 4);
  ASSERT_TRUE(std::holds_alternative<Loxodromic>(l));
  EXPECT_EQ(std::get<Loxodromic>(l).translation_length, 1u);
  auto x = g.parse("taT");
  auto e = t.classify(x, t.root(), 4);
  ASSERT_TRUE(std::holds_alternative<Elliptic>(e));
  EXPECT_EQ(std::get<Elliptic>(e).fixed, t.vertex(g.t()));
  EXPECT_FALSE(t.fixes(x, t.root()));
  EXPECT_THROW(t.classify(x, t.root(), 0), std::invalid_argument);
}

TEST(Classify, AgreesWithMinimalDisplacement) {
  for (auto [m, n] : {std::pair{2, 3}, {2, 4}}) {
    BassSerreTree t(BaumslagSolitarGroup(m, n));
    const auto& g = t.group();
    auto b = t.ball(t.root(), 4);
    Rng rng(23);
    for (int i = 0; i < 150; ++i) {
      BSWord x = random_word(g, rng, 1 + rng.below(5));
      auto c = t.classify(x, t.root(), 8);
      ASSERT_FALSE(std::holds_alternative<Unknown>(c));
      std::size_t best = SIZE_MAX;
      for (const auto& v : b.vertices) best = std::min(best, t.distance(v, t.act(x, v)));
      if (auto* el = std::get_if<Elliptic>(&c)) {
        EXPECT_TRUE(t.fixes(x, el->fixed));
        EXPECT_EQ(best, 0u);
      } else {
        auto len = std::get<Loxodromic>(c).translation_length;
        EXPECT_EQ(best, len) << g.format(x);
      }
    }
  }
}

TEST(Zeta, Values) {
  BassSerreTree t23(BaumslagSolitarGroup(2, 3));
  const auto& g = t23.group();
  EXPECT_EQ(t23.zeta(g.a(3), t23.root()), 3);
  EXPECT_EQ(t23.zeta(g.a(6), t23.root()), 6);
  EXPECT_EQ(t23.zeta(g.a(6), t23.vertex(g.t(-1))), 9);
  EXPECT_EQ(t23.zeta(g.a(6), t23.vertex(g.t())), 4);
  EXPECT_THROW(t23.zeta(g.identity(), t23.root()), std::invalid_argument);
  EXPECT_THROW(t23.zeta(g.a(2), t23.vertex(g.t())), std::invalid_argument);

  BassSerreTree t24(BaumslagSolitarGroup(2, 4));
  const auto& h = t24.group();
  EXPECT_EQ(t24.zeta(h.a(2), t24.vertex(h.t(-1))), 4);
  // zeta(<a>) = (2/4) zeta(t^{-1}<a>).
  EXPECT_EQ(2 * t24.zeta(h.a(2), t24.root()), t24.zeta(h.a(2), t24.vertex(h.t(-1))));
}

TEST(Zeta, RelationOnFixedSubtrees) {
  BassSerreTree t24(BaumslagSolitarGroup(2, 4));
  EXPECT_TRUE(t24.zeta_relation_check(t24.group().a(2), 4));
  BassSerreTree t23(BaumslagSolitarGroup(2, 3));
  const auto& g = t23.group();
  EXPECT_TRUE(t23.zeta_relation_check(g.a(6), 5));
  auto fixed = t23.fixed_subtree(g.a(6), 5);
  std::set<std::int64_t> zetas;
  for (const auto& v : fixed.vertices) zetas.insert(t23.zeta(g.a(6), v));
  EXPECT_EQ(zetas, (std::set<std::int64_t>{4, 6, 9}));
  // A single fixed vertex passes vacuously: a fixes no neighbour of <a> in BS(2,3).
  EXPECT_EQ(t23.fixed_subtree(g.a(1), 3).vertices.size(), 1u);
  EXPECT_TRUE(t23.zeta_relation_check(g.a(1), 3));
  EXPECT_FALSE(t23.zeta_relation_check(g.t(), 3));
}

TEST(FixedSubtree, NegativeSubtreeInsideFixedSetOfAm) {
  BassSerreTree t(BaumslagSolitarGroup(2, 4));
  const auto& g = t.group();
  for (std::size_t r = 0; r <= 5; ++r) {
    auto fixed = names(t, t.fixed_subtree(g.a(2), r).vertices);
    std::set<std::string> syntactic, brute;
    for (const auto& v : t.ball(t.root(), r).vertices) {
      if (t.in_negative_subtree(v)) syntactic.insert(g.format(v));
      if (t.fixes(g.a(2), v)) brute.insert(g.format(v));
    }
    EXPECT_EQ(fixed, brute) << r;
    EXPECT_EQ(syntactic.size(), (std::size_t{1} << (r + 1)) - 1);
    EXPECT_TRUE(std::includes(fixed.begin(), fixed.end(), syntactic.begin(), syntactic.end())) << r;
    // Equal up to radius 1 only: from t^{-1}<a> (zeta = 4 = n) every out-edge is fixed.
    if (r <= 1) {
      EXPECT_EQ(fixed, syntactic);
    } else {
      EXPECT_GT(fixed.size(), syntactic.size());
    }
  }
  // t^{-1} a t <a> is fixed: (t^{-1} a t)^{-1} a^2 (t^{-1} a t) = t^{-1} a^4 t = a^2.
  auto w = g.parse("Tat");
  EXPECT_EQ(g.mul(g.inv(w), g.mul(g.a(2), w)), g.a(2));
  EXPECT_FALSE(t.in_negative_subtree(t.vertex(w)));
  // Heights of the fixed set stay <= 0: no out-edge of <a> is fixed.
  for (const auto& v : t.fixed_subtree(g.a(2), 5).vertices) EXPECT_LE(t.height(v), 0);
}

TEST(FixedSubtree, BoundedHeightsForBS23) {
  BassSerreTree t(BaumslagSolitarGroup(2, 3));
  const auto& g = t.group();
  std::int64_t widest = 0;
  for (std::int64_t j : {2, 4, 6}) {
    auto fixed = t.fixed_subtree(g.a(j), 6);
    ASSERT_FALSE(fixed.vertices.empty());
    std::int64_t lo = 0, hi = 0;
    for (const auto& v : fixed.vertices) {
      lo = std::min(lo, t.height(v));
      hi = std::max(hi, t.height(v));
    }
    widest = std::max(widest, hi - lo);
    // Same range one radius earlier: the heights do not grow with the ball.
    std::int64_t lo5 = 0, hi5 = 0;
    for (const auto& v : t.fixed_subtree(g.a(j), 5).vertices) {
      lo5 = std::min(lo5, t.height(v));
      hi5 = std::max(hi5, t.height(v));
    }
    EXPECT_EQ(lo, lo5);
    EXPECT_EQ(hi, hi5);
  }
  EXPECT_LE(widest, 2);
}

TEST(FixedSubtree, IdentityAndLoxodromic) {
  BassSerreTree t(BaumslagSolitarGroup(2, 3));
  EXPECT_EQ(t.fixed_subtree(t.group().identity(), 2).vertices.size(), regular_ball_size(5, 2));
  auto lox = t.fixed_subtree(t.group().t(), 3);
  EXPECT_TRUE(lox.loxodromic);
  EXPECT_TRUE(lox.vertices.empty());
}

TEST(RootBound, Cases) {
  BassSerreTree t23(BaumslagSolitarGroup(2, 3));
  const auto& g = t23.group();
  EXPECT_TRUE(t23.root_bound_check(g.a(3), g.a(), 3, 3));
  BassSerreTree t24(BaumslagSolitarGroup(2, 4));
  EXPECT_TRUE(t24.root_bound_check(t24.group().a(2), t24.group().a(), 2, 3));
  Rng rng(5);
  for (int i = 0; i < 40; ++i) {
    std::int64_t k = 1 + static_cast<std::int64_t>(rng.below(6));
    std::int64_t n = 1 + static_cast<std::int64_t>(rng.below(5));
    // Conjugated roots keep the relation at their own fixed vertex.
    BSWord w = random_word(g, rng, 3);
    BSWord u = g.mul(w, g.mul(g.a(k), g.inv(w)));
    EXPECT_TRUE(t23.root_bound_check(power(g, u, n), u, n, 6));
  }
  EXPECT_THROW(t23.root_bound_check(g.a(4), g.a(), 3, 3), std::invalid_argument);
}

TEST(IntersectionIndex, Values) {
  BassSerreTree t(BaumslagSolitarGroup(2, 3));
  const auto& g = t.group();
  EXPECT_EQ(t.intersection_index_witness(g.identity(), 10), 1);
  EXPECT_EQ(t.intersection_index_witness(g.t(), 20), 3);
  EXPECT_EQ(t.intersection_index_witness(g.mul(g.t(), g.t()), 20), 9);
  EXPECT_EQ(t.intersection_index_witness(g.mul(g.t(), g.t()), 8), std::nullopt);
  EXPECT_EQ(t.intersection_index_witness(g.t(-1), 20), 2);
}

TEST(FixedSubtree, HeightBoundsFromZeta) {
  BassSerreTree t(BaumslagSolitarGroup(2, 3));
  const auto& g = t.group();
  // v_2(k) steps down and v_3(k) steps up from the root.
  EXPECT_EQ(t.fixed_height_bounds(g.a(6), t.root()), (std::pair<std::int64_t, std::int64_t>{-1, 1}));
  EXPECT_EQ(t.fixed_height_bounds(g.a(4), t.root()), (std::pair<std::int64_t, std::int64_t>{-2, 0}));
  EXPECT_EQ(t.fixed_height_bounds(g.a(18), t.root()), (std::pair<std::int64_t, std::int64_t>{-1, 2}));
  for (std::int64_t k : {2, 4, 6, 12, 18}) {
    auto [lo, hi] = *t.fixed_height_bounds(g.a(k), t.root());
    std::int64_t seen_lo = 0, seen_hi = 0;
    for (const auto& v : t.fixed_subtree(g.a(k), 6).vertices) {
      seen_lo = std::min(seen_lo, t.height(v));
      seen_hi = std::max(seen_hi, t.height(v));
    }
    // The bound is attained: every height in range has a fixed vertex on the geodesic.
    EXPECT_EQ(seen_lo, lo) << k;
    EXPECT_EQ(seen_hi, hi) << k;
  }
  BassSerreTree t24(BaumslagSolitarGroup(2, 4));
  EXPECT_FALSE(t24.fixed_height_bounds(t24.group().a(2), t24.root()).has_value());
}
