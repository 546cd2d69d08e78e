#ifndef SRSLAB_ORACLES_HPP
#define SRSLAB_ORACLES_HPP

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "srslab/chabauty.hpp"
#include "srslab/groups/baumslag_solitar.hpp"
#include "srslab/groups/integers.hpp"
#include "srslab/groups/thompson.hpp"
#include "srslab/groups/wreath.hpp"

namespace srs {

template <Group G>
SubgroupOracle<G> trivial_subgroup(std::shared_ptr<const G> group) {
  auto id = group->identity();
  return SubgroupOracle<G>(
      group, SubgroupFamily::trivial, "TrivialSubgroup",
      [id](const element_t<G>& x) { return from_bool(x == id); }, nullptr,
      [](const element_t<G>&) { return true; });
}

/// <a> in BS(m,n): the normal form has no t letters. a normalizes <a>.
inline SubgroupOracle<BaumslagSolitarGroup> bs_cyclic_a(
    std::shared_ptr<const BaumslagSolitarGroup> group) {
  return SubgroupOracle<BaumslagSolitarGroup>(
      group, SubgroupFamily::cyclic_a_in_bs, "CyclicA_inBS",
      [](const BSWord& x) { return from_bool(x.is_power_of_a()); }, nullptr,
      [](const BSWord& g) { return g.is_power_of_a(); });
}

// ---------------------------------------------------------------------------
// Thompson's F: H generated by the translates t_k f t_k^{-1}.

/// Powers of f, memoized. f must be compactly supported in [0,1] with a
/// nonzero initial slope exponent, so the translates have disjoint supports.
class ThompsonPowers {
 public:
  explicit ThompsonPowers(PLMap f) : f_(std::move(f)) {
    ThompsonGroup::validate(f_);
    if (f_.is_identity() || !f_.compactly_supported() || f_.bp.front() < Dyadic(0) ||
        Dyadic(1) < f_.bp.back() || f_.pieces[1].k == 0) {
      throw std::invalid_argument("f must be supported in [0,1] with a non-unit initial slope");
    }
    powers_.emplace(0, PLMap{});
    powers_.emplace(1, f_);
  }

  const PLMap& f() const { return f_; }
  const Dyadic& support_low() const { return f_.bp.front(); }
  std::int64_t initial_slope_exponent() const { return f_.pieces[1].k; }

  PLMap power(std::int64_t j) const {
    std::lock_guard<std::mutex> lock(mu_);
    return powers_locked(j);
  }

 private:
  PLMap powers_locked(std::int64_t j) const {
    auto it = powers_.find(j);
    if (it != powers_.end()) return it->second;
    PLMap r = j > 0 ? powers_locked(j - 1) : powers_locked(j + 1);
    r = j > 0 ? compose(f_, r) : compose(inverse(f_), r);
    powers_.emplace(j, r);
    return r;
  }

  PLMap f_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::int64_t, PLMap> powers_;
};

/// Exponents j_k with g = prod_k t_k f^{j_k} t_k^{-1}, or nullopt if g is not
/// in H. The exponent on slot k is read from the slope of g just right of
/// k + lo(f) and the decomposition is then checked by exact equality.
inline std::optional<std::map<std::int64_t, std::int64_t>> thompson_h_decompose(
    const PLMap& g, const ThompsonPowers& fp) {
  std::map<std::int64_t, std::int64_t> exps;
  if (g.is_identity()) return exps;
  if (!g.compactly_supported()) return std::nullopt;
  for (const auto& x : g.bp) {
    mpz_class fl = x.floor();
    if (!fl.fits_slong_p()) return std::nullopt;
    std::int64_t k = fl.get_si();
    exps.emplace(k, 0);
    if (x.is_integer()) exps.emplace(k - 1, 0);
  }
  const std::int64_t e = fp.initial_slope_exponent();
  PLMap h;
  for (auto& [k, j] : exps) {
    std::int64_t s = g.pieces[g.piece_index(fp.support_low() + Dyadic(static_cast<long>(k)))].k;
    if (s % e != 0) return std::nullopt;
    j = s / e;
    if (j != 0) h = compose(h, ThompsonGroup::shifted(fp.power(j), k));
  }
  if (!(h == g)) return std::nullopt;
  for (auto it = exps.begin(); it != exps.end();) {
    it = it->second == 0 ? exps.erase(it) : std::next(it);
  }
  return exps;
}

/// Conjugate of g by the translation x -> x + k, i.e. x -> g(x + k) - k.
inline PLMap translate_conjugate(const PLMap& g, const Dyadic& k) {
  PLMap r = g;
  for (auto& b : r.bp) b -= k;
  for (auto& p : r.pieces) p.q = p.q + k.scaled(p.k) - k;
  return r;
}

/// H is normalized by integer translations, so g is moved next to the origin
/// first. Conjugates by long translations otherwise carry breakpoints far
/// outside the int64 slot range.
inline bool thompson_h_membership(const PLMap& g, const ThompsonPowers& fp) {
  if (g.bp.empty()) return thompson_h_decompose(g, fp).has_value();
  return thompson_h_decompose(translate_conjugate(g, Dyadic(g.bp.front().floor())), fp)
      .has_value();
}

inline bool thompson_h_membership(const PLMap& g, const PLMap& f) {
  return thompson_h_membership(g, ThompsonPowers(f));
}

/// Integer translations permute the generators of H.
inline bool is_integer_translation(const PLMap& g) {
  return g.bp.empty() && g.pieces[0].k == 0 && g.pieces[0].q.is_integer();
}

/// The part of w over [lo, hi], precomposed with the integer translation by
/// floor(lo), so that its domain starts in [0, 1).
inline PLMap local_germ(const PLMap& w, const Dyadic& lo, const Dyadic& hi) {
  PLMap r = restrict_to(w, lo, hi);
  Dyadic k(lo.floor());
  for (auto& b : r.bp) b -= k;
  for (auto& p : r.pieces) p.q = p.q + k.scaled(p.k);
  return r;
}

/// Decides w^{-1} q w in H for compactly supported q without conjugating by
/// all of w. A non-trivial element of H has support hull [k + lo f, k' + hi f]
/// for integers k <= k', which rules out most conjugates from the preimages
/// of the hull of q alone. Otherwise only the germ of w over that preimage
/// matters, up to an integer translation (which normalizes H); answers are
/// cached per (q, germ).
class ThompsonConjugateCache {
 public:
  explicit ThompsonConjugateCache(std::shared_ptr<const ThompsonPowers> fp,
                                  std::size_t max_entries = 1u << 20)
      : fp_(std::move(fp)), max_entries_(max_entries) {}

  std::optional<Membership> operator()(const PLMap& w, const PLMap& q, Membership q_in_h) {
    if (q.is_identity()) return Membership::yes;
    if (!q.compactly_supported()) return std::nullopt;
    return answer(w, w.preimage(q.bp.front()), w.preimage(q.bp.back()), q, q_in_h);
  }

  /// The same answers for a fixed w. w is inverted once and preimages of
  /// breakpoints are memoized, since windows share most of their endpoints.
  static SubgroupOracle<ThompsonGroup>::Prepared prepare(std::shared_ptr<ThompsonConjugateCache> self,
                                                          const PLMap& w) {
    auto winv = std::make_shared<const PLMap>(inverse(w));
    auto memo = std::make_shared<std::unordered_map<Dyadic, Dyadic>>();
    return [self, w, winv, memo](const PLMap& q, Membership q_in_h) -> std::optional<Membership> {
      if (q.is_identity()) return Membership::yes;
      if (!q.compactly_supported()) return std::nullopt;
      auto pre = [&](const Dyadic& y) -> const Dyadic& {
        auto it = memo->find(y);
        if (it == memo->end()) it = memo->emplace(y, (*winv)(y)).first;
        return it->second;
      };
      const Dyadic& lo = pre(q.bp.front());
      const Dyadic& hi = pre(q.bp.back());
      return self->answer(w, lo, hi, q, q_in_h);
    };
  }

  std::size_t hits() const { return hits_; }

 private:
  /// [lo, hi] is the preimage under w of the hull of q.
  Membership answer(const PLMap& w, const Dyadic& lo, const Dyadic& hi, const PLMap& q, Membership q_in_h) {
    if (!(lo - fp_->support_low()).is_integer() || !(hi - fp_->f().bp.back()).is_integer()) {
      return Membership::no;
    }
    std::size_t i = w.piece_index(lo);
    const Affine& piece = w.pieces[i];
    if (piece.k == 0 && piece.q.is_integer() && (i == w.bp.size() || hi <= w.bp[i])) return q_in_h;
    PLMap u = local_germ(w, lo, hi);
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(q, u);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++hits_;
      return it->second;
    }
    Membership m = from_bool(thompson_h_membership(compose(inverse(u), compose(q, u)), *fp_));
    if (cache_.size() >= max_entries_) cache_.clear();
    cache_.emplace(std::move(key), m);
    return m;
  }

  struct KeyHash {
    std::size_t operator()(const std::pair<PLMap, PLMap>& k) const {
      return hash_combine(k.first.hash(), k.second.hash());
    }
  };

  std::shared_ptr<const ThompsonPowers> fp_;
  std::size_t max_entries_;
  std::mutex mu_;
  std::unordered_map<std::pair<PLMap, PLMap>, Membership, KeyHash> cache_;
  std::size_t hits_ = 0;
};

inline SubgroupOracle<ThompsonGroup> thompson_h(std::shared_ptr<const ThompsonGroup> group,
                                               const PLMap& f) {
  auto fp = std::make_shared<const ThompsonPowers>(f);
  auto cache = std::make_shared<ThompsonConjugateCache>(fp);
  return SubgroupOracle<ThompsonGroup>(
      group, SubgroupFamily::thompson_h, "ThompsonH(" + group->format(f) + ")",
      [fp](const PLMap& x) { return from_bool(thompson_h_membership(x, *fp)); },
      [](const PLMap& x) { return x.compactly_supported(); }, is_integer_translation,
      [cache](const PLMap& w) { return ThompsonConjugateCache::prepare(cache, w); });
}

// ---------------------------------------------------------------------------
// Wreath products.

/// y in <a> inside the lamp group: enumeration of powers for finite groups,
/// divisibility for Z.
template <Group A>
bool cyclic_contains(const A& group, const element_t<A>& a, const element_t<A>& y) {
  if (y == group.identity()) return true;
  if constexpr (std::is_same_v<A, IntegerGroup>) {
    if (a == 0) return false;
    return y % a == 0;
  } else {
    auto p = a;
    for (std::size_t i = 0; i < 1u << 20 && !(p == group.identity()); ++i) {
      if (p == y) return true;
      p = group.mul(p, a);
    }
    if (!(p == group.identity())) throw std::domain_error("lamp element of unbounded order");
    return false;
  }
}

/// Certified part of a limit lamp configuration: sites present in `values`
/// are known (identity values stored explicitly), all others are unknown.
template <class Point, class AElem>
struct LampWindow {
  std::map<Point, AElem> values;
};

/// x in H = <delta_b^{c(b) a c(b)^{-1}} : b certified>, for lamp-only x.
template <Group A, class Point>
Membership wreath_limit_membership(const A& lamps, const std::map<Point, element_t<A>>& x_lamps,
                                   const LampWindow<Point, element_t<A>>& conf,
                                   const element_t<A>& a) {
  for (const auto& [b, v] : x_lamps) {
    auto it = conf.values.find(b);
    if (it == conf.values.end()) return Membership::undetermined;
    const auto& c = it->second;
    if (!cyclic_contains(lamps, a, lamps.mul(lamps.inv(c), lamps.mul(v, c)))) return Membership::no;
  }
  return Membership::yes;
}

template <Group A, Group B, class Action>
SubgroupOracle<WreathProduct<A, B, Action>> wreath_diagonal(
    std::shared_ptr<const WreathProduct<A, B, Action>> group, element_t<A> a,
    LampWindow<typename Action::point_type, element_t<A>> conf) {
  using W = WreathProduct<A, B, Action>;
  using E = element_t<W>;
  if (a == group->lamp_group().identity()) throw std::invalid_argument("a must be non-trivial");
  auto c = std::make_shared<const decltype(conf)>(std::move(conf));
  auto g = group;
  return SubgroupOracle<W>(
      group, SubgroupFamily::wreath_diagonal,
      "WreathDiagonal(" + group->lamp_group().format(a) + ")",
      [g, c, a](const E& x) {
        if (!(x.pos == g->base_group().identity())) return Membership::no;
        return wreath_limit_membership(g->lamp_group(), x.lamps, *c, a);
      },
      [g](const E& x) { return x.pos == g->base_group().identity(); });
}

/// H = sum over the main orbit of <a>. Lamps elsewhere, and base moves,
/// keep H invariant as long as the lamps on the orbit commute with a.
template <Group A, Group B, class Action>
SubgroupOracle<WreathProduct<A, B, Action>> perm_wreath_sum(
    std::shared_ptr<const WreathProduct<A, B, Action>> group, element_t<A> a) {
  using W = WreathProduct<A, B, Action>;
  using E = element_t<W>;
  if (a == group->lamp_group().identity()) throw std::invalid_argument("a must be non-trivial");
  auto g = group;
  return SubgroupOracle<W>(
      group, SubgroupFamily::perm_wreath_sum,
      "PermWreathSum(" + group->lamp_group().format(a) + ")",
      [g, a](const E& x) {
        if (!(x.pos == g->base_group().identity())) return Membership::no;
        for (const auto& [p, v] : x.lamps) {
          if (!g->action().in_main_orbit(p) || !cyclic_contains(g->lamp_group(), a, v)) {
            return Membership::no;
          }
        }
        return Membership::yes;
      },
      [g](const E& x) { return x.pos == g->base_group().identity(); },
      [g, a](const E& x) {
        for (const auto& [p, v] : x.lamps) {
          if (g->action().in_main_orbit(p) && !cyclic_contains(g->lamp_group(), a, v)) return false;
        }
        return true;
      });
}

}  // namespace srs

#endif  // SRSLAB_ORACLES_HPP
