#ifndef SRSLAB_MEASURE_BUILDER_HPP
#define SRSLAB_MEASURE_BUILDER_HPP

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "srslab/chabauty.hpp"
#include "srslab/enumeration.hpp"
#include "srslab/group.hpp"
#include "srslab/groups/integers.hpp"
#include "srslab/groups/thompson.hpp"
#include "srslab/groups/wreath.hpp"
#include "srslab/hashing.hpp"
#include "srslab/random.hpp"
#include "srslab/records.hpp"

namespace srs {

struct BuilderConfig {
  /// Last tile index built.
  std::uint64_t i_max = 64;
  /// Largest explicit product ball.
  std::size_t delta_cap = 100000;
  /// Levels n for which Delta_n and Q_n are materialized; later levels keep
  /// Q_n = Q_{materialize_levels} and only a short prefix of Delta_n.
  std::size_t materialize_levels = 3;
  /// Conjugates d h0 d^{-1} added to Q per level.
  std::size_t q_conjugate_cap = 512;
  /// Enumeration elements added to Q per level.
  std::size_t q_block = 8;
  /// Delta prefix used for verification beyond materialize_levels.
  std::size_t verify_delta = 4;
  /// Membership comparisons per witness; more triples than this are sampled.
  std::size_t verify_budget = 256;
  /// Candidates tried by searching strategies.
  std::size_t search_budget = 4096;
};

// ---------------------------------------------------------------------------
// Tiles and product balls.

/// Tiles 0..count-1: {e}, then {g, g^{-1}} (or {g} for involutions) for each
/// element g not yet covered, in enumeration order. Stops early for finite
/// groups.
template <Group G>
std::vector<std::vector<element_t<G>>> make_tiles(Enumerator<G>& en, std::size_t count) {
  using E = element_t<G>;
  const G& g = en.group();
  std::vector<std::vector<E>> tiles;
  std::unordered_set<E> used;
  for (std::size_t i = 0; tiles.size() < count; ++i) {
    const E* x = nullptr;
    try {
      x = &en.at(i);
    } catch (const std::out_of_range&) {
      break;
    }
    if (used.count(*x)) continue;
    E xi = g.inv(*x);
    used.insert(*x);
    if (xi == *x) {
      tiles.push_back({*x});
    } else {
      used.insert(xi);
      tiles.push_back({*x, std::move(xi)});
    }
  }
  return tiles;
}

template <Group G>
std::vector<std::vector<element_t<G>>> make_tiles(const G& group, std::size_t n) {
  Enumerator<G> en(group);
  return make_tiles(en, n + 1);
}

template <Group G>
struct ElementBall {
  /// Breadth-first order; the identity comes first.
  std::vector<element_t<G>> elements;
  /// Word length up to which the ball is complete.
  std::uint64_t radius = 0;
  bool capped = false;
};

/// All products of length <= length over the alphabet, by breadth-first
/// closure, truncated at `cap` elements.
template <Group G>
ElementBall<G> product_ball(const G& group, const std::vector<element_t<G>>& alphabet,
                            std::uint64_t length, std::size_t cap) {
  using E = element_t<G>;
  ElementBall<G> ball;
  if (cap == 0) {
    ball.capped = true;
    return ball;
  }
  std::unordered_set<E> seen{group.identity()};
  ball.elements.push_back(group.identity());
  std::vector<E> frontier{group.identity()};
  while (ball.radius < length && !frontier.empty()) {
    std::vector<E> next;
    for (const auto& x : frontier) {
      for (const auto& s : alphabet) {
        E y = group.mul(x, s);
        if (seen.count(y)) continue;
        if (ball.elements.size() >= cap) {
          ball.capped = true;
          return ball;
        }
        seen.insert(y);
        ball.elements.push_back(y);
        next.push_back(std::move(y));
      }
    }
    frontier = std::move(next);
    ++ball.radius;
  }
  if (frontier.empty()) ball.radius = length;
  return ball;
}

// ---------------------------------------------------------------------------
// Witness verification.

/// x in g H g^{-1}.
template <Group G>
Membership in_conjugate(const SubgroupOracle<G>& h, const element_t<G>& g, const element_t<G>& x) {
  if (!h.in_ambient(x)) return Membership::no;
  return h.contains(conjugate_by(h.group(), g, x));
}

struct WitnessCheck {
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::size_t undetermined = 0;
  std::string first_failure;
  bool ok() const { return failures == 0 && undetermined == 0; }
};

/// Q n H = Q n (b^{+-1} z) H (b^{+-1} z)^{-1} for every z in Z, checked
/// exhaustively.
template <Group G>
WitnessCheck verify_witness(const SubgroupOracle<G>& h, const std::vector<element_t<G>>& q,
                            const std::vector<element_t<G>>& z, const element_t<G>& b) {
  const G& grp = h.group();
  WitnessCheck r;
  const element_t<G> bi = grp.inv(b);
  for (const auto& x : q) {
    Membership base = h.in_ambient(x) ? h.contains(x) : Membership::no;
    for (const auto& zz : z) {
      for (const auto* s : {&b, &bi}) {
        ++r.checks;
        Membership m = in_conjugate(h, grp.mul(*s, zz), x);
        if (m == Membership::undetermined || base == Membership::undetermined) {
          ++r.undetermined;
        } else if (m != base) {
          if (r.failures++ == 0) r.first_failure = grp.format(x) + " with z=" + grp.format(zz);
        }
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Witness strategies.

template <Group G>
struct WitnessQuery {
  /// Index n+1 of the witness being chosen.
  std::size_t index = 0;
  /// S_n: the tiles A_0..A_n together with b_0^{+-1}..b_n^{+-1}.
  const std::vector<element_t<G>>* alphabet = nullptr;
  /// Word length of Delta_{n+1}.
  std::uint64_t length = 0;
  /// Materialized Q_{n+1}.
  const Window<G>* q = nullptr;
  /// Materialized part of Delta_{n+1}.
  const ElementBall<G>* delta = nullptr;
  element_t<G> h0;
  std::function<bool(const element_t<G>&)> admissible;
};

template <Group G>
struct Witness {
  element_t<G> b;
  std::string strategy;
  std::string certificate;
  /// The certificate covers the uncapped Delta and Q, not only the explicit
  /// sets.
  bool covers_uncapped = false;
};

template <Group G>
using WitnessFinder = std::function<Witness<G>(const WitnessQuery<G>&)>;

/// ceil(|x|).
inline mpz_class abs_ceil(const Dyadic& x) { return x.sign() < 0 ? mpz_class(-x.floor()) : x.ceil(); }

/// Translation x -> x + m for arbitrary m.
inline PLMap big_translation(const mpz_class& m) {
  PLMap t;
  t.pieces[0].q = Dyadic(m);
  return t;
}

/// Largest displacement |s(x) - x| over R, and largest |breakpoint|.
struct PLExtent {
  mpz_class displacement;
  mpz_class radius;
};

inline PLExtent pl_extent(const PLMap& s) {
  PLExtent e{abs_ceil(s.left_end().q), 0};
  e.displacement = std::max(e.displacement, abs_ceil(s.right_end().q));
  for (std::size_t i = 0; i < s.bp.size(); ++i) {
    e.displacement = std::max(e.displacement, abs_ceil(s.image_of_bp(i) - s.bp[i]));
    e.radius = std::max(e.radius, abs_ceil(s.bp[i]));
  }
  return e;
}

/// Smallest N with supp(q) in [-N, N] for the compactly supported q; 0 if none.
inline mpz_class support_radius(const std::vector<PLMap>& q) {
  mpz_class n = 0;
  for (const auto& x : q) {
    if (x.is_identity() || !x.compactly_supported()) continue;
    n = std::max({n, abs_ceil(x.bp.front()), abs_ceil(x.bp.back())});
  }
  return n;
}

/// Smallest M >= 1 with supp(z r_z^+) in (-inf, M] and supp(z r_z^-) in
/// [-M, inf) for all z, where r_z^{+-} undo the end translations of z. Also
/// covers the breakpoints themselves.
inline mpz_class end_radius(const std::vector<PLMap>& z) {
  mpz_class m = 1;
  for (const auto& x : z) {
    if (x.bp.empty()) continue;
    m = std::max({m, abs_ceil(x.bp.front()), abs_ceil(x.bp.back()),
                  abs_ceil(x.image_of_bp(0)), abs_ceil(x.image_of_bp(x.bp.size() - 1))});
  }
  return m;
}

/// The translation by -(M + N + 1) for explicit Q and Z.
inline PLMap thompson_find_b(const std::vector<PLMap>& q, const std::vector<PLMap>& z) {
  if (z.empty()) return PLMap{};
  mpz_class shift = end_radius(z) + support_radius(q) + 1;
  return big_translation(-shift);
}

/// Witness for Thompson's F bounding every word of length <= L over the
/// alphabet: such a word moves points by at most L * D and has breakpoints
/// in [-(R + L D), R + L D], so M = R + 2 L D bounds its ends. Supports of
/// d^{-1} q d for d in Delta grow by at most L D as well; the conjugates of
/// h0 by Delta are covered by the same bound.
inline Witness<ThompsonGroup> thompson_analytic_witness(const WitnessQuery<ThompsonGroup>& query) {
  mpz_class d_max = 0, r_max = 0;
  for (const auto& s : *query.alphabet) {
    auto e = pl_extent(s);
    d_max = std::max(d_max, e.displacement);
    r_max = std::max(r_max, e.radius);
  }
  mpz_class l(std::to_string(query.length));
  mpz_class ld = l * d_max;
  mpz_class m = std::max(mpz_class(1), mpz_class(r_max + 2 * ld));
  mpz_class nq = support_radius(query.q->elements());
  nq = std::max(nq, mpz_class(support_radius({query.h0}) + ld));
  mpz_class n = nq + ld;
  mpz_class shift = m + n + 1;
  PLMap b = big_translation(-shift);
  std::size_t bumps = 0;
  while (!query.admissible(b)) {
    ++shift;
    ++bumps;
    b = big_translation(-shift);
  }
  std::ostringstream cert;
  cert << "translation by -(M+N+1); L=" << query.length
       << " bits(D)=" << mpz_sizeinbase(d_max.get_mpz_t(), 2)
       << " bits(M)=" << mpz_sizeinbase(m.get_mpz_t(), 2)
       << " bits(N)=" << mpz_sizeinbase(n.get_mpz_t(), 2) << " bumps=" << bumps;
  return {std::move(b), "thompson-analytic", cert.str(), true};
}

/// Lamp sites of x on the distinguished orbit.
template <Group A, Group B, class Action>
void orbit_footprint(const WreathProduct<A, B, Action>& g, const element_t<WreathProduct<A, B, Action>>& x,
                     std::set<typename Action::point_type>& out) {
  for (const auto& [p, v] : x.lamps) {
    if (g.action().in_main_orbit(p)) out.insert(p);
  }
}

/// x lies in the sum of lamp groups over the distinguished orbit.
template <Group A, Group B, class Action>
bool on_orbit_lamps_only(const WreathProduct<A, B, Action>& g,
                         const element_t<WreathProduct<A, B, Action>>& x) {
  if (!(x.pos == g.base_group().identity())) return false;
  for (const auto& [p, v] : x.lamps) {
    if (!g.action().in_main_orbit(p)) return false;
  }
  return true;
}

/// Smallest k >= k_min with (k e_1) F_Z and (-k e_1) F_Z both disjoint from F_Q.
template <Group A, class Action>
std::optional<std::int64_t> footprint_shift(const WreathProduct<A, LatticeGroup, Action>& g,
                                            const std::set<typename Action::point_type>& fz,
                                            const std::set<typename Action::point_type>& fq,
                                            std::int64_t k_min, std::size_t budget) {
  const auto& base = g.base_group();
  for (std::int64_t k = k_min; k < k_min + static_cast<std::int64_t>(budget); ++k) {
    bool ok = true;
    for (std::int64_t sign : {1, -1}) {
      IntVec v = base.basis(0, sign * k);
      for (const auto& p : fz) {
        if (fq.count(g.action().act(base, v, p))) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
    }
    if (ok) return k;
  }
  return std::nullopt;
}

/// Footprints of explicit Q and Z: F_Z from the on-orbit lamps of Z, F_Q from
/// the elements of Q lying in the sum over the orbit (others are in no
/// conjugate of H).
template <Group A, class Action>
element_t<WreathProduct<A, LatticeGroup, Action>> permwreath_find_b(
    const WreathProduct<A, LatticeGroup, Action>& g,
    const std::vector<element_t<WreathProduct<A, LatticeGroup, Action>>>& q,
    const std::vector<element_t<WreathProduct<A, LatticeGroup, Action>>>& z,
    std::size_t budget = 1u << 16) {
  std::set<typename Action::point_type> fz, fq;
  for (const auto& x : z) orbit_footprint(g, x, fz);
  for (const auto& x : q) {
    if (on_orbit_lamps_only(g, x)) orbit_footprint(g, x, fq);
  }
  auto k = footprint_shift(g, fz, fq, 0, budget);
  if (!k) throw std::runtime_error("footprint search exhausted");
  return g.shift(g.base_group().basis(0, *k));
}

/// Builder strategy for permutational wreath products over Z^d: footprint
/// search on the materialized Delta and Q. F_Q uses the positions reached by
/// Delta, since conjugating a lamp-only q by (psi, c) moves its support by c.
template <Group A, class Action>
Witness<WreathProduct<A, LatticeGroup, Action>> permwreath_footprint_witness(
    const WreathProduct<A, LatticeGroup, Action>& g,
    const WitnessQuery<WreathProduct<A, LatticeGroup, Action>>& query, std::size_t budget) {
  using W = WreathProduct<A, LatticeGroup, Action>;
  std::set<typename Action::point_type> fz, fq;
  std::set<IntVec> positions;
  for (const auto& d : query.delta->elements) {
    orbit_footprint(g, d, fz);
    positions.insert(d.pos);
  }
  for (const auto& x : query.q->elements()) {
    if (!on_orbit_lamps_only(g, x)) continue;
    for (const auto& c : positions) {
      orbit_footprint(g, conjugate_by(g, g.shift(c), x), fq);
    }
  }
  std::int64_t k = 1;
  while (true) {
    auto found = footprint_shift(g, fz, fq, k, budget);
    if (!found) throw std::runtime_error("footprint search exhausted at index " + std::to_string(query.index));
    element_t<W> b = g.shift(g.base_group().basis(0, *found));
    if (query.admissible(b)) {
      std::ostringstream cert;
      cert << "footprint shift k=" << *found << " |F_Z|=" << fz.size() << " |F_Q|=" << fq.size();
      return {std::move(b), "permwreath-footprint", cert.str(), false};
    }
    k = *found + 1;
  }
}

// ---------------------------------------------------------------------------
// The inductive construction.

template <Group G>
struct LevelRecord {
  std::size_t index = 0;
  std::vector<element_t<G>> tile;
  std::vector<element_t<G>> a;
  element_t<G> b;
  std::string strategy;
  std::string certificate;
  bool certificate_covers_uncapped = false;
  /// Word length of Delta_index.
  std::uint64_t length = 0;
  std::size_t delta_size = 0;
  bool delta_capped = false;
  bool delta_materialized = false;
  std::size_t q_size = 0;
  bool q_capped = false;
  /// "full" when every (q, z, sign) triple was checked, else "sampled".
  std::string verification;
  std::size_t checks = 0;
};

template <Group G>
struct TileMasses {
  std::uint64_t index = 0;
  mpq_class p;
  /// A_i minus {b_i, b_i^{-1}}, each with mass part_each.
  std::vector<element_t<G>> part;
  mpq_class part_each;
  /// {b_i, b_i^{-1}}, each with mass b_each; empty for tile 0.
  std::vector<element_t<G>> bpart;
  mpq_class b_each;
  /// Probability of the part given the tile.
  double part_probability = 1;
};

template <Group G>
struct BuiltMeasure {
  std::vector<TileMasses<G>> tiles;
  std::uint64_t i_max = 0;
  /// sum_{i > i_max} p_i.
  mpq_class residual;
  bool exact_p = true;
  TailDistribution p = TailDistribution::telescoping();

  std::unordered_map<element_t<G>, mpq_class> masses() const {
    std::unordered_map<element_t<G>, mpq_class> m;
    for (const auto& t : tiles) {
      for (const auto& x : t.part) m[x] += t.part_each;
      for (const auto& x : t.bpart) m[x] += t.b_each;
    }
    return m;
  }
  mpq_class tile_total(std::size_t i) const {
    const auto& t = tiles[i];
    return t.part_each * static_cast<unsigned long>(t.part.size()) +
           t.b_each * static_cast<unsigned long>(t.bpart.size());
  }
};

/// Masses of tile i >= 1 with total p: alpha_i p spread uniformly over
/// A \ {b, b^{-1}} and the rest split evenly over {b, b^{-1}}; everything on
/// the b-part when the rest of A is empty. alpha_i = 2^{-i}.
template <Group G>
TileMasses<G> assemble_tile(const G& grp, std::uint64_t i, const mpq_class& p,
                            const std::vector<element_t<G>>& a, const element_t<G>& b) {
  if (i == 0) throw std::invalid_argument("tile 0 carries no witness");
  TileMasses<G> t;
  t.index = i;
  t.p = p;
  element_t<G> bi = grp.inv(b);
  t.bpart.push_back(b);
  if (!(bi == b)) t.bpart.push_back(bi);
  for (const auto& x : a) {
    if (!(x == b) && !(x == bi)) t.part.push_back(x);
  }
  mpq_class alpha(1, mpz_class(1) << static_cast<mp_bitcnt_t>(i));
  if (t.part.empty()) {
    t.part_probability = 0;
    t.b_each = p / static_cast<unsigned long>(t.bpart.size());
  } else {
    t.part_probability = alpha.get_d();
    t.part_each = alpha * p / static_cast<unsigned long>(t.part.size());
    t.b_each = (1 - alpha) * p / static_cast<unsigned long>(t.bpart.size());
  }
  return t;
}

/// Builds tiles, Delta_n, Q_n and witnesses b_n up to config.i_max.
///
/// Delta_{n+1} is the set of words of length <= Phi(n+1) over S_n and b_{n+1}
/// is a witness for Z = Delta_{n+1} and Q = union of d^{-1} Q_{n+1} d over
/// d in Delta_{n+1}: these are the sets containing the prefix and suffix
/// products around a record of value n+1.
template <Group G>
class MeasureBuilder {
 public:
  using E = element_t<G>;

  MeasureBuilder(SubgroupOracle<G> h, E h0, TailDistribution p, BuilderConfig config,
                 WitnessFinder<G> finder)
      : h_(std::move(h)),
        h0_(std::move(h0)),
        p_(std::move(p)),
        phi_(p_),
        config_(config),
        finder_(std::move(finder)) {}

  void build() {
    const G& grp = h_.group();
    if (h0_ == grp.identity() || h_.contains(h0_) != Membership::yes) {
      throw std::invalid_argument("h0 must be a non-trivial element of H");
    }
    if (auto top = p_.support_max(); top && config_.i_max > *top) {
      throw std::invalid_argument("i_max beyond the support of p");
    }
    Enumerator<G> en(grp);
    tiles_ = make_tiles(en, config_.i_max + 1);
    if (tiles_.size() < config_.i_max + 1) throw std::invalid_argument("group has too few tiles for i_max");
    std::unordered_set<E> tiled;
    for (const auto& t : tiles_) tiled.insert(t.begin(), t.end());
    std::unordered_set<E> bs{grp.identity()};
    auto admissible = [&](const E& x) { return !tiled.count(x) && !bs.count(x); };

    levels_.clear();
    windows_.clear();
    LevelRecord<G> zero;
    zero.index = 0;
    zero.tile = tiles_[0];
    zero.a = tiles_[0];
    zero.b = grp.identity();
    zero.strategy = "base";
    zero.verification = "full";
    zero.delta_materialized = true;
    levels_.push_back(zero);

    std::vector<E> alphabet{grp.identity()};
    std::unordered_set<E> in_alphabet{grp.identity()};
    auto add_letter = [&](const E& x) {
      if (in_alphabet.insert(x).second) alphabet.push_back(x);
    };
    Window<G> q_current("Q_0");
    std::size_t block_cursor = 0;

    for (std::uint64_t n = 0; n < config_.i_max; ++n) {
      const std::size_t idx = n + 1;
      LevelRecord<G> rec;
      rec.index = idx;
      rec.tile = tiles_[idx];
      for (const auto& x : rec.tile) {
        if (!bs.count(x)) rec.a.push_back(x);
      }
      rec.length = phi_(idx);
      rec.delta_materialized = idx <= config_.materialize_levels;
      auto delta = product_ball(grp, alphabet, rec.length,
                                rec.delta_materialized ? config_.delta_cap : config_.verify_delta);
      rec.delta_size = delta.elements.size();
      rec.delta_capped = delta.capped;

      if (rec.delta_materialized) {
        Window<G> next = q_current;
        next.set_label("Q_" + std::to_string(idx));
        std::size_t added = 0;
        for (const auto& d : delta.elements) {
          if (added == config_.q_conjugate_cap) break;
          next.insert(conjugate_by(grp, grp.inv(d), h0_));
          ++added;
        }
        rec.q_capped = delta.capped || added < delta.elements.size();
        for (std::size_t i = 0; i < config_.q_block; ++i) {
          try {
            next.insert(en.at(block_cursor));
          } catch (const std::out_of_range&) {
            break;
          }
          ++block_cursor;
        }
        q_current = std::move(next);
        windows_.push_back(q_current);
      } else {
        rec.q_capped = true;
      }
      rec.q_size = q_current.size();

      WitnessQuery<G> query;
      query.index = idx;
      query.alphabet = &alphabet;
      query.length = rec.length;
      query.q = &q_current;
      query.delta = &delta;
      query.h0 = h0_;
      query.admissible = admissible;
      Witness<G> w = finder_(query);
      if (!admissible(w.b)) throw std::logic_error("witness strategy returned an inadmissible element");
      rec.b = w.b;
      rec.strategy = w.strategy;
      rec.certificate = w.certificate;
      rec.certificate_covers_uncapped = w.covers_uncapped;

      verify(rec, delta, q_current);

      bs.insert(rec.b);
      bs.insert(grp.inv(rec.b));
      for (const auto& x : rec.a) add_letter(x);
      add_letter(rec.b);
      add_letter(grp.inv(rec.b));
      levels_.push_back(std::move(rec));
    }
    built_ = true;
  }

  BuiltMeasure<G> assemble() const {
    if (!built_) throw std::logic_error("assemble before build");
    const G& grp = h_.group();
    BuiltMeasure<G> m;
    m.i_max = config_.i_max;
    m.p = p_;
    mpq_class total = 0;
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      const auto& lv = levels_[i];
      TileMasses<G> t;
      t.index = i;
      if (auto ex = p_.exact_mass(i)) {
        t.p = *ex;
      } else {
        t.p = mpq_class(static_cast<double>(p_.mass(i)));
        m.exact_p = false;
      }
      total += t.p;
      if (i == 0) {
        t.part = lv.a;
        t.part_each = t.p / static_cast<unsigned long>(t.part.size());
        t.part_probability = 1;
        m.tiles.push_back(std::move(t));
        continue;
      }
      t = assemble_tile(grp, i, t.p, lv.a, lv.b);
      m.tiles.push_back(std::move(t));
    }
    if (auto tail = p_.exact_tail(config_.i_max + 1); tail && m.exact_p) {
      m.residual = *tail;
    } else {
      m.residual = 1 - total;
    }
    return m;
  }

  const SubgroupOracle<G>& subgroup() const { return h_; }
  const E& h0() const { return h0_; }
  const TailDistribution& distribution() const { return p_; }
  const Gauge& gauge() const { return phi_; }
  const BuilderConfig& config() const { return config_; }
  const std::vector<LevelRecord<G>>& levels() const { return levels_; }
  /// Materialized Q_1, Q_2, ...
  const std::vector<Window<G>>& windows() const { return windows_; }
  const std::vector<std::vector<E>>& tiles() const { return tiles_; }

 private:
  /// Compares memberships on (d^{-1} q d, z, b^{+-1}) with d, z from the
  /// explicit Delta; samples the triples when there are too many.
  void verify(LevelRecord<G>& rec, const ElementBall<G>& delta, const Window<G>& q) {
    const G& grp = h_.group();
    const std::size_t nd = std::min(delta.elements.size(), std::max<std::size_t>(config_.verify_delta, 1));
    const std::size_t nq = q.size();
    const E bi = grp.inv(rec.b);
    const std::size_t total = nd * nq * nd * 2;
    auto check = [&](std::size_t di, std::size_t qi, std::size_t zi, bool inverse) {
      const E& d = delta.elements[di];
      E x = conjugate_by(grp, d, q[qi]);
      Membership base = h_.in_ambient(x) ? h_.contains(x) : Membership::no;
      Membership m = in_conjugate(h_, grp.mul(inverse ? bi : rec.b, delta.elements[zi]), x);
      ++rec.checks;
      if (m == Membership::undetermined || base == Membership::undetermined || m != base) {
        throw std::runtime_error("witness b_" + std::to_string(rec.index) + " (" + rec.strategy +
                                 ") fails for q=" + grp.format(q[qi]) + " d=" + grp.format(d) +
                                 " z=" + grp.format(delta.elements[zi]));
      }
    };
    if (total == 0) {
      rec.verification = "full";
      return;
    }
    if (total <= config_.verify_budget) {
      rec.verification = "full";
      for (std::size_t di = 0; di < nd; ++di)
        for (std::size_t qi = 0; qi < nq; ++qi)
          for (std::size_t zi = 0; zi < nd; ++zi)
            for (bool inv : {false, true}) check(di, qi, zi, inv);
      return;
    }
    rec.verification = "sampled";
    Rng rng(derive_seed(0x5eed0fb1d5ULL, rec.index));
    for (std::size_t i = 0; i < config_.verify_budget; ++i) {
      check(rng.below(nd), rng.below(nq), rng.below(nd), rng.below(2) == 1);
    }
  }

  SubgroupOracle<G> h_;
  E h0_;
  TailDistribution p_;
  Gauge phi_;
  BuilderConfig config_;
  WitnessFinder<G> finder_;
  std::vector<std::vector<E>> tiles_;
  std::vector<LevelRecord<G>> levels_;
  std::vector<Window<G>> windows_;
  bool built_ = false;
};

/// Generic strategy: enumeration order, first admissible candidate passing
/// the exhaustive check against the explicit sets.
template <Group G>
WitnessFinder<G> generic_witness_finder(SubgroupOracle<G> h, std::size_t verify_delta,
                                        std::size_t budget) {
  return [h, verify_delta, budget](const WitnessQuery<G>& query) {
    const G& grp = h.group();
    std::vector<element_t<G>> z(query.delta->elements.begin(),
                                query.delta->elements.begin() +
                                    static_cast<std::ptrdiff_t>(std::min(verify_delta, query.delta->elements.size())));
    std::vector<element_t<G>> q;
    for (const auto& d : z) {
      for (const auto& x : query.q->elements()) q.push_back(conjugate_by(grp, d, x));
    }
    Enumerator<G> en(grp);
    for (std::size_t i = 1; i <= budget; ++i) {
      const element_t<G>* c = nullptr;
      try {
        c = &en.at(i);
      } catch (const std::out_of_range&) {
        break;
      }
      if (!query.admissible(*c)) continue;
      if (verify_witness(h, q, z, *c).ok()) {
        return Witness<G>{*c, "generic-search", "enumeration index " + std::to_string(i), false};
      }
    }
    throw std::runtime_error("generic witness search exhausted its budget at index " +
                             std::to_string(query.index) + " (|Q|=" + std::to_string(q.size()) +
                             ", |Z|=" + std::to_string(z.size()) + ")");
  };
}

// ---------------------------------------------------------------------------
// Sampling, entropy, and the record conditions.

template <Group G>
struct Step {
  element_t<G> g;
  std::uint64_t index = 0;
  bool is_b = false;
};

/// Draws the tile index from p, redrawing indices beyond i_max (each redraw
/// counted in `truncations`), then an element of the tile by its conditional
/// masses.
template <Group G>
Step<G> sample_step(const BuiltMeasure<G>& m, Rng& rng, std::size_t* truncations = nullptr) {
  std::uint64_t i = m.p.sample(rng);
  while (i > m.i_max) {
    if (truncations) ++*truncations;
    i = m.p.sample(rng);
  }
  const auto& t = m.tiles[i];
  bool part = t.bpart.empty() || (!t.part.empty() && rng.uniform() < t.part_probability);
  const auto& pool = part ? t.part : t.bpart;
  return {pool[rng.below(pool.size())], i, !part};
}

/// -q log q for an exact positive rational, in long double even when q is far
/// below the double range.
inline long double neg_q_log_q(const mpq_class& q) {
  if (q <= 0) return 0;
  long en = 0, ed = 0;
  double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
  double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
  long double lg = std::log(static_cast<long double>(mn) / md) +
                   static_cast<long double>(en - ed) * std::log(2.0L);
  long double v = std::ldexp(static_cast<long double>(mn) / md, static_cast<int>(en - ed));
  return -v * lg;
}

struct EntropyBound {
  long double h_mu = 0;
  long double bound = 0;
  bool holds = false;
  long double slack() const { return bound - h_mu; }
};

/// H(mu restricted to tiles <= i_max) against log 4 + H(p restricted to
/// indices <= i_max), from the exact masses.
template <Group G>
EntropyBound entropy_bound_check(const BuiltMeasure<G>& m) {
  EntropyBound r;
  for (const auto& [g, q] : m.masses()) r.h_mu += neg_q_log_q(q);
  long double hp = 0;
  for (const auto& t : m.tiles) hp += neg_q_log_q(t.p);
  r.bound = std::log(4.0L) + hp;
  r.holds = r.h_mu <= r.bound;
  return r;
}

struct RecordFlags {
  std::size_t time = 0;
  std::uint64_t value = 0;
  bool a = false;
  bool b = false;
  bool c = false;
  bool all() const { return a && b && c; }
};

struct AbcReport {
  std::vector<RecordFlags> records;
  /// Position in `records` from which (A), (B), (C) hold through the horizon.
  std::optional<std::size_t> k0;
  std::size_t horizon = 0;
  std::optional<std::size_t> t_k0() const {
    if (!k0) return std::nullopt;
    return records[*k0].time;
  }
};

/// Conditions on the records (ties included) of the tile-index sequence:
/// (A) the step at a record is b_R^{+-1} (vacuous for R = 0), (B) the next
/// record time is at most Phi(R), (C) no value equal to R occurs before the
/// next record, i.e. the next record is not a tie. For the last record, (B)
/// fails only once the horizon has passed Phi(R) and (C) only on a tie within
/// the horizon. k0 is accepted only if T_{k0} <= horizon / 2.
inline AbcReport verify_abc(const std::vector<std::uint64_t>& indices, const std::vector<bool>& is_b,
                            const Gauge& phi) {
  AbcReport rep;
  rep.horizon = indices.size();
  if (indices.empty()) return rep;
  auto trace = record_times(indices);
  const auto& times = trace.record_times;
  const auto& values = trace.record_values;
  for (std::size_t k = 0; k < times.size(); ++k) {
    RecordFlags f;
    f.time = times[k];
    f.value = values[k];
    f.a = f.value == 0 || is_b[f.time - 1];
    std::uint64_t bound = phi(f.value);
    if (k + 1 < times.size()) {
      f.b = times[k + 1] <= bound;
      f.c = values[k + 1] != values[k];
    } else {
      f.b = rep.horizon < bound;
      f.c = true;
    }
    rep.records.push_back(f);
  }
  std::size_t k = rep.records.size();
  while (k > 0 && rep.records[k - 1].all()) --k;
  if (k < rep.records.size() && rep.records[k].time <= rep.horizon / 2) rep.k0 = k;
  return rep;
}

// ---------------------------------------------------------------------------
// Artifact.

inline std::string rational_str(const mpq_class& q) { return q.get_str(); }

/// Versioned JSON form of the builder state and the assembled masses.
template <Group G>
nlohmann::ordered_json measure_artifact(const MeasureBuilder<G>& builder, const BuiltMeasure<G>& m) {
  const G& grp = builder.subgroup().group();
  nlohmann::ordered_json j;
  j["format"] = "srslab.measure/1";
  j["group"] = grp.name();
  j["subgroup"] = builder.subgroup().description();
  j["h0"] = grp.format(builder.h0());
  j["p"] = builder.distribution().label();
  j["alpha"] = "2^-i";
  const auto& c = builder.config();
  j["config"] = {{"i_max", c.i_max},
                 {"delta_cap", c.delta_cap},
                 {"materialize_levels", c.materialize_levels},
                 {"q_conjugate_cap", c.q_conjugate_cap},
                 {"q_block", c.q_block},
                 {"verify_delta", c.verify_delta},
                 {"verify_budget", c.verify_budget}};
  j["exact_p"] = m.exact_p;
  j["residual"] = rational_str(m.residual);
  auto& lv = j["levels"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < builder.levels().size(); ++i) {
    const auto& r = builder.levels()[i];
    const auto& t = m.tiles[i];
    nlohmann::ordered_json e;
    e["index"] = r.index;
    e["p"] = rational_str(t.p);
    auto fmt = [&](const std::vector<element_t<G>>& xs) {
      auto a = nlohmann::ordered_json::array();
      for (const auto& x : xs) a.push_back(grp.format(x));
      return a;
    };
    e["tile"] = fmt(r.tile);
    e["a"] = fmt(r.a);
    auto atoms = nlohmann::ordered_json::array();
    for (const auto& x : t.part) atoms.push_back({grp.format(x), rational_str(t.part_each), "a"});
    for (const auto& x : t.bpart) atoms.push_back({grp.format(x), rational_str(t.b_each), "b"});
    e["atoms"] = std::move(atoms);
    e["strategy"] = r.strategy;
    e["certificate"] = r.certificate;
    e["certificate_covers_uncapped"] = r.certificate_covers_uncapped;
    e["delta"] = {{"length", r.length},
                  {"size", r.delta_size},
                  {"capped", r.delta_capped},
                  {"materialized", r.delta_materialized}};
    e["q"] = {{"size", r.q_size}, {"capped", r.q_capped}};
    e["verification"] = r.verification;
    e["checks"] = r.checks;
    lv.push_back(std::move(e));
  }
  auto& ws = j["windows"] = nlohmann::ordered_json::array();
  for (const auto& w : builder.windows()) {
    nlohmann::ordered_json e;
    e["label"] = w.label();
    auto a = nlohmann::ordered_json::array();
    for (const auto& x : w.elements()) a.push_back(grp.format(x));
    e["elements"] = std::move(a);
    ws.push_back(std::move(e));
  }
  return j;
}

/// FNV-1a of the compact serialization, excluding any "content_hash" field.
inline std::string artifact_hash(nlohmann::ordered_json j) {
  j.erase("content_hash");
  return hex64(fnv1a64(j.dump()));
}

struct ArtifactCheck {
  std::string name;
  bool ok = true;
  std::string detail;
};

/// Re-checks an artifact from its recorded data: the content hash, exact
/// tile sums, and mu(g) = mu(g^{-1}) for every atom.
template <Group G>
std::vector<ArtifactCheck> verify_measure_artifact(const G& grp, const nlohmann::ordered_json& j) {
  std::vector<ArtifactCheck> out;
  if (j.contains("content_hash")) {
    ArtifactCheck c{"content_hash", false, ""};
    c.ok = j["content_hash"] == artifact_hash(j);
    if (!c.ok) c.detail = "hash mismatch";
    out.push_back(c);
  }
  ArtifactCheck sums{"tile_sums", true, ""}, sym{"symmetry", true, ""};
  std::unordered_map<element_t<G>, mpq_class> mass;
  for (const auto& lv : j.at("levels")) {
    mpq_class total = 0;
    for (const auto& a : lv.at("atoms")) {
      mpq_class q(a.at(1).get<std::string>());
      q.canonicalize();
      total += q;
      mass[grp.parse(a.at(0).get<std::string>())] += q;
    }
    mpq_class p(lv.at("p").get<std::string>());
    p.canonicalize();
    if (total != p && sums.ok) {
      sums.ok = false;
      sums.detail = "tile " + std::to_string(lv.at("index").get<std::size_t>());
    }
  }
  for (const auto& [g, q] : mass) {
    auto it = mass.find(grp.inv(g));
    if (it == mass.end() || it->second != q) {
      sym.ok = false;
      sym.detail = grp.format(g);
      break;
    }
  }
  out.push_back(sums);
  out.push_back(sym);
  return out;
}

}  // namespace srs

#endif  // SRSLAB_MEASURE_BUILDER_HPP
