#ifndef SRSLAB_WALKS_HPP
#define SRSLAB_WALKS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srslab/chabauty.hpp"
#include "srslab/group.hpp"
#include "srslab/groups/integers.hpp"
#include "srslab/groups/wreath.hpp"
#include "srslab/hashing.hpp"
#include "srslab/measure_builder.hpp"
#include "srslab/oracles.hpp"
#include "srslab/random.hpp"

namespace srs {

// ---------------------------------------------------------------------------
// Samplers and trajectories.

/// Draws one increment. Index and is_b are only meaningful for built measures.
template <Group G>
using Sampler = std::function<Step<G>(Rng&)>;

template <Group G>
Sampler<G> dirac_sampler(element_t<G> g) {
  return [g](Rng&) { return Step<G>{g, 0, false}; };
}

/// Uniform on `support`; step index is the position in the list.
template <Group G>
Sampler<G> uniform_sampler(std::vector<element_t<G>> support) {
  if (support.empty()) throw std::invalid_argument("empty support");
  auto s = std::make_shared<const std::vector<element_t<G>>>(std::move(support));
  return [s](Rng& rng) {
    std::size_t i = rng.below(s->size());
    return Step<G>{(*s)[i], i, false};
  };
}

/// Identity with probability 1/2, otherwise uniform on `moves` (index 1 + position).
template <Group G>
Sampler<G> lazy_uniform_sampler(const G& group, std::vector<element_t<G>> moves) {
  if (moves.empty()) throw std::invalid_argument("empty support");
  auto s = std::make_shared<const std::vector<element_t<G>>>(std::move(moves));
  auto e = group.identity();
  return [s, e](Rng& rng) {
    if (rng.below(2) == 0) return Step<G>{e, 0, false};
    std::size_t i = rng.below(s->size());
    return Step<G>{(*s)[i], i + 1, false};
  };
}

/// Sampler for a built measure; redraws beyond i_max are added to `truncations`.
template <Group G>
Sampler<G> measure_sampler(std::shared_ptr<const BuiltMeasure<G>> m,
                           std::shared_ptr<std::size_t> truncations = nullptr) {
  return [m, truncations](Rng& rng) { return sample_step(*m, rng, truncations.get()); };
}

template <Group G>
struct Trajectory {
  using E = element_t<G>;
  std::uint64_t seed = 0;
  std::vector<E> steps;
  std::vector<std::uint64_t> indices;
  std::vector<bool> is_b;
  /// w_1..w_n; empty when the walk was run without keeping products.
  std::vector<E> products;

  std::size_t horizon() const { return steps.size(); }
};

/// Right random walk w_n = g_1 ... g_n with Rng(seed).
template <Group G>
Trajectory<G> run_walk(const G& group, const Sampler<G>& sampler, std::size_t horizon,
                       std::uint64_t seed, bool keep_products = true) {
  Trajectory<G> t;
  t.seed = seed;
  Rng rng(seed);
  element_t<G> w = group.identity();
  t.steps.reserve(horizon);
  t.indices.reserve(horizon);
  t.is_b.reserve(horizon);
  if (keep_products) t.products.reserve(horizon);
  for (std::size_t n = 0; n < horizon; ++n) {
    Step<G> s = sampler(rng);
    if (keep_products) {
      w = group.mul(w, s.g);
      t.products.push_back(w);
    }
    t.steps.push_back(std::move(s.g));
    t.indices.push_back(s.index);
    t.is_b.push_back(s.is_b);
  }
  return t;
}

/// w_n for 0 <= n <= horizon, from the stored products or by replaying steps.
template <Group G>
element_t<G> product_at(const G& group, const Trajectory<G>& t, std::size_t n) {
  if (n == 0) return group.identity();
  if (!t.products.empty()) return t.products.at(n - 1);
  element_t<G> w = group.identity();
  for (std::size_t i = 0; i < n; ++i) w = group.mul(w, t.steps[i]);
  return w;
}

/// Stored products agree with the products recomputed from the steps.
template <Group G>
bool log_integrity(const G& group, const Trajectory<G>& t) {
  if (t.products.empty()) return t.steps.empty();
  if (t.products.size() != t.steps.size()) return false;
  element_t<G> w = group.identity();
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    w = group.mul(w, t.steps[i]);
    if (!(w == t.products[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Lamp stabilization.

/// Final lamp configuration of a wreath walk with per-site last-change times.
/// Sites never touched have value e and last change 0. A site is certified
/// when its last change is at most horizon - ceil(guard * horizon).
template <class Point, class AElem>
struct LampRecord {
  std::vector<Point> window;
  std::map<Point, std::size_t> last_change;
  /// Non-identity final values.
  std::map<Point, AElem> final_values;
  std::vector<bool> stabilized;
  std::size_t horizon = 0;
  double guard = 0.2;

  std::size_t cutoff() const {
    auto g = static_cast<std::size_t>(std::ceil(guard * static_cast<double>(horizon)));
    return horizon - std::min(g, horizon);
  }
  std::size_t last_change_at(const Point& x) const {
    auto it = last_change.find(x);
    return it == last_change.end() ? 0 : it->second;
  }
  bool certified(const Point& x) const { return last_change_at(x) <= cutoff(); }
  std::size_t certified_count() const {
    return static_cast<std::size_t>(std::count(stabilized.begin(), stabilized.end(), true));
  }
  bool window_certified() const { return certified_count() == window.size(); }
};

/// Streams a walk started at `start` and keeps track of lamp changes.
template <Group A, Group B, class Action>
class LampTracker {
 public:
  using W = WreathProduct<A, B, Action>;
  using E = element_t<W>;
  using Point = typename Action::point_type;

  LampTracker(const W& group, E start) : group_(&group), w_(std::move(start)) {}
  explicit LampTracker(const W& group) : LampTracker(group, group.identity()) {}

  void step(const E& g) {
    ++n_;
    for (const auto& [y, v] : g.lamps) last_[group_->action().act(group_->base_group(), w_.pos, y)] = n_;
    group_->right_multiply(w_, g);
  }

  const E& product() const { return w_; }
  std::size_t steps() const { return n_; }

  LampRecord<Point, element_t<A>> finish(std::vector<Point> window, double guard) const {
    LampRecord<Point, element_t<A>> r;
    r.window = std::move(window);
    r.last_change = last_;
    r.final_values = w_.lamps;
    r.horizon = n_;
    r.guard = guard;
    for (const auto& x : r.window) r.stabilized.push_back(r.certified(x));
    return r;
  }

 private:
  const W* group_;
  E w_;
  std::map<Point, std::size_t> last_;
  std::size_t n_ = 0;
};

/// Lamp record of `start` * traj (start = e gives the trajectory itself).
template <Group A, Group B, class Action>
LampRecord<typename Action::point_type, element_t<A>> lamp_limit(
    const WreathProduct<A, B, Action>& group, const Trajectory<WreathProduct<A, B, Action>>& traj,
    std::vector<typename Action::point_type> window, double guard = 0.2,
    std::optional<element_t<WreathProduct<A, B, Action>>> start = std::nullopt) {
  LampTracker<A, B, Action> tr(group, start ? *start : group.identity());
  for (const auto& g : traj.steps) tr.step(g);
  return tr.finish(std::move(window), guard);
}

/// H(w) = <delta_b^{c(b) a c(b)^{-1}}> for the limit configuration c. A lamp at
/// an uncertified site is undetermined unless another site already rules x out.
template <Group A, Group B, class Action>
SubgroupOracle<WreathProduct<A, B, Action>> limit_subgroup(
    std::shared_ptr<const WreathProduct<A, B, Action>> group,
    LampRecord<typename Action::point_type, element_t<A>> lamps, element_t<A> a) {
  using W = WreathProduct<A, B, Action>;
  using E = element_t<W>;
  if (a == group->lamp_group().identity()) throw std::invalid_argument("a must be non-trivial");
  auto rec = std::make_shared<const decltype(lamps)>(std::move(lamps));
  auto g = group;
  return SubgroupOracle<W>(
      group, SubgroupFamily::wreath_diagonal,
      "WreathDiagonal(" + group->lamp_group().format(a) + ")",
      [g, rec, a](const E& x) {
        if (!(x.pos == g->base_group().identity())) return Membership::no;
        const A& lg = g->lamp_group();
        bool unknown = false;
        for (const auto& [b, v] : x.lamps) {
          if (!rec->certified(b)) {
            unknown = true;
            continue;
          }
          auto it = rec->final_values.find(b);
          auto c = it == rec->final_values.end() ? lg.identity() : it->second;
          if (!cyclic_contains(lg, a, lg.mul(lg.inv(c), lg.mul(v, c)))) return Membership::no;
        }
        return unknown ? Membership::undetermined : Membership::yes;
      },
      [g](const E& x) { return x.pos == g->base_group().identity(); });
}

/// Points of {-r..r}^d, lexicographic.
inline std::vector<IntVec> lattice_box(const LatticeGroup& z, std::int64_t r) {
  std::vector<IntVec> out;
  IntVec v = z.identity();
  for (auto& c : v.c) c = -r;
  while (true) {
    out.push_back(v);
    std::size_t i = v.size();
    while (i > 0 && v[i - 1] == r) v[--i] = -r;
    if (i == 0) break;
    ++v[i - 1];
  }
  return out;
}

/// delta_x^s for every site x and every s != e of a finite lamp group.
template <Group A, Group B, class Action>
Window<WreathProduct<A, B, Action>> lamp_probe(const WreathProduct<A, B, Action>& group,
                                               const std::vector<typename Action::point_type>& sites,
                                               const std::vector<element_t<A>>& values,
                                               std::string label) {
  Window<WreathProduct<A, B, Action>> w(std::move(label));
  for (const auto& x : sites) {
    for (const auto& s : values) {
      if (!(s == group.lamp_group().identity())) w.insert(group.lamp(x, s));
    }
  }
  return w;
}

/// Membership bitmask of H on a window plus its hash; equal fingerprints
/// have equal masks.
struct SubgroupFingerprint {
  std::string label;
  std::string mask;
  std::uint64_t hash = 0;

  friend bool operator==(const SubgroupFingerprint& x, const SubgroupFingerprint& y) {
    return x.label == y.label && x.mask == y.mask;
  }
};

template <Group G>
SubgroupFingerprint subgroup_fingerprint(const SubgroupOracle<G>& h, const Window<G>& q) {
  SubgroupFingerprint f;
  f.label = q.label();
  for (auto m : window_intersect(h, q)) f.mask += to_char(m);
  f.hash = Fnv1a().update(f.label).update("=").update(f.mask).value();
  return f;
}

struct EquivarianceResult {
  Membership verdict = Membership::undetermined;
  std::size_t compared = 0;
  std::size_t undetermined = 0;
  std::string first_mismatch;
};

/// H(g w) against g H(w) g^{-1} on the lamp probe over `window`, from the
/// lamp records of g w and w.
template <Group A, Group B, class Action>
EquivarianceResult equivariance_from_records(
    std::shared_ptr<const WreathProduct<A, B, Action>> group,
    const LampRecord<typename Action::point_type, element_t<A>>& rec_w,
    const LampRecord<typename Action::point_type, element_t<A>>& rec_gw,
    const element_t<WreathProduct<A, B, Action>>& g,
    const std::vector<typename Action::point_type>& window,
    const std::vector<element_t<A>>& lamp_values, const element_t<A>& a) {
  auto h_w = limit_subgroup(group, rec_w, a);
  auto h_gw = limit_subgroup(group, rec_gw, a);
  auto rhs = h_w.conjugate(g);
  EquivarianceResult r;
  auto probe = lamp_probe(*group, window, lamp_values, "probe");
  for (const auto& x : probe.elements()) {
    Membership left = h_gw.contains(x);
    Membership right = rhs.contains(x);
    if (left == Membership::undetermined || right == Membership::undetermined) {
      ++r.undetermined;
      continue;
    }
    ++r.compared;
    if (left != right && r.first_mismatch.empty()) r.first_mismatch = group->format(x);
  }
  if (!r.first_mismatch.empty()) {
    r.verdict = Membership::no;
  } else {
    r.verdict = r.undetermined ? Membership::undetermined : Membership::yes;
  }
  return r;
}

/// Sites of w's record consulted by the right-hand side: the supports of
/// g^{-1} x g for lamps x over `window`.
template <Group A, Group B, class Action>
std::vector<typename Action::point_type> conjugated_sites(
    const WreathProduct<A, B, Action>& group, const element_t<WreathProduct<A, B, Action>>& g,
    const std::vector<typename Action::point_type>& window, const element_t<A>& value) {
  std::set<typename Action::point_type> out;
  for (const auto& s : window) {
    for (const auto& [y, v] : conjugate_by(group, g, group.lamp(s, value)).lamps) out.insert(y);
  }
  return {out.begin(), out.end()};
}

/// Certification is decided per site, so no window fixes it in advance.
template <Group A, Group B, class Action>
EquivarianceResult equivariance_check(std::shared_ptr<const WreathProduct<A, B, Action>> group,
                                      const Trajectory<WreathProduct<A, B, Action>>& traj,
                                      const element_t<WreathProduct<A, B, Action>>& g,
                                      const std::vector<typename Action::point_type>& window,
                                      const std::vector<element_t<A>>& lamp_values,
                                      const element_t<A>& a, double guard = 0.2) {
  return equivariance_from_records(group, lamp_limit(*group, traj, {}, guard),
                                   lamp_limit(*group, traj, {}, guard, g), g, window, lamp_values, a);
}

// ---------------------------------------------------------------------------
// Lamplighter experiments on A wr Z^d.

template <Group A>
using LampWreath = WreathProduct<A, LatticeGroup>;

/// Lamp generators at 0 and the unit moves.
template <Group A>
std::vector<element_t<LampWreath<A>>> wreath_moves(const LampWreath<A>& g) {
  std::vector<element_t<LampWreath<A>>> out;
  for (const auto& s : g.lamp_group().generators()) {
    out.push_back(g.lamp(g.basepoint(), s));
    if (!(g.lamp_group().inv(s) == s)) out.push_back(g.lamp(g.basepoint(), g.lamp_group().inv(s)));
  }
  for (const auto& b : g.base_group().generators()) out.push_back(g.shift(b));
  return out;
}

struct LampTrial {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t certified = 0;
  std::size_t window_size = 0;
  /// Present when every window site is certified.
  std::optional<SubgroupFingerprint> fingerprint;
};

template <Group A>
struct LampExperiment {
  std::shared_ptr<const LampWreath<A>> group;
  element_t<A> a;
  std::vector<element_t<A>> lamp_values;
  std::size_t horizon = 10000;
  double guard = 0.2;
  /// Sites whose certification is reported.
  std::int64_t certify_radius = 2;
  /// Sites of the fingerprint probe.
  std::int64_t fingerprint_radius = 1;
  std::uint64_t base_seed = 0;

  Sampler<LampWreath<A>> sampler() const { return lazy_uniform_sampler(*group, wreath_moves(*group)); }

  LampRecord<IntVec, element_t<A>> record(std::uint64_t seed) const {
    auto s = sampler();
    Rng rng(seed);
    LampTracker<A, LatticeGroup, RegularAction<LatticeGroup>> tr(*group);
    for (std::size_t n = 0; n < horizon; ++n) tr.step(s(rng).g);
    return tr.finish(lattice_box(group->base_group(), certify_radius), guard);
  }

  SubgroupOracle<LampWreath<A>> subgroup(LampRecord<IntVec, element_t<A>> rec) const {
    return limit_subgroup(group, std::move(rec), a);
  }

  LampTrial trial(std::size_t i) const {
    LampTrial t;
    t.index = i;
    t.seed = derive_seed(base_seed, i);
    auto rec = record(t.seed);
    t.certified = rec.certified_count();
    t.window_size = rec.window.size();
    auto sites = lattice_box(group->base_group(), fingerprint_radius);
    bool all = std::all_of(sites.begin(), sites.end(), [&](const IntVec& x) { return rec.certified(x); });
    if (all) {
      auto probe = lamp_probe(*group, sites, lamp_values, "box(" + std::to_string(fingerprint_radius) + ")");
      t.fingerprint = subgroup_fingerprint(subgroup(std::move(rec)), probe);
    }
    return t;
  }
};

/// Distinct fingerprints with their counts, over trials whose probe sites are
/// all certified.
struct FingerprintCensus {
  std::map<std::string, std::size_t> counts;
  std::size_t trials = 0;
  std::size_t excluded = 0;
  std::size_t distinct() const { return counts.size(); }
};

template <Group A>
FingerprintCensus fingerprint_census(const LampExperiment<A>& ex, std::size_t trials,
                                     std::vector<LampTrial>* out = nullptr) {
  FingerprintCensus c;
  c.trials = trials;
  for (std::size_t i = 0; i < trials; ++i) {
    LampTrial t = ex.trial(i);
    if (t.fingerprint) {
      ++c.counts[t.fingerprint->mask];
    } else {
      ++c.excluded;
    }
    if (out) out->push_back(std::move(t));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Martingale of window masses.

struct MartingalePoint {
  std::size_t step = 0;
  double estimate = 0;
  std::size_t used = 0;
  std::size_t undetermined = 0;
};

/// At each checkpoint n, the share of sampled limit subgroups H that contain
/// w_n^{-1} h w_n, i.e. with h in w_n H w_n^{-1}. `eta(k)` returns the k-th
/// independent sample; undetermined answers are left out and counted.
template <Group G>
std::vector<MartingalePoint> martingale_mass(const G& group, const Trajectory<G>& traj,
                                             const element_t<G>& h,
                                             const std::function<const SubgroupOracle<G>&(std::size_t)>& eta,
                                             std::size_t samples, std::vector<std::size_t> checkpoints) {
  std::sort(checkpoints.begin(), checkpoints.end());
  std::vector<MartingalePoint> out;
  element_t<G> w = group.identity();
  std::size_t n = 0;
  for (auto c : checkpoints) {
    if (c > traj.horizon()) throw std::out_of_range("checkpoint beyond the horizon");
    for (; n < c; ++n) w = group.mul(w, traj.steps[n]);
    element_t<G> x = conjugate_by(group, w, h);
    MartingalePoint p;
    p.step = c;
    std::size_t yes = 0;
    for (std::size_t k = 0; k < samples; ++k) {
      const auto& hk = eta(k);
      Membership m = hk.in_ambient(x) ? hk.contains(x) : Membership::no;
      if (m == Membership::undetermined) {
        ++p.undetermined;
        continue;
      }
      ++p.used;
      yes += m == Membership::yes ? 1 : 0;
    }
    p.estimate = p.used ? static_cast<double>(yes) / static_cast<double>(p.used) : 0.0;
    out.push_back(p);
  }
  return out;
}

/// Distance of the last estimate from {0, 1}.
inline double terminal_gap(const std::vector<MartingalePoint>& pts) {
  if (pts.empty()) return 1.0;
  double e = pts.back().estimate;
  return std::min(e, 1.0 - e);
}

/// normalish witness counts over the probes box(1), ..., box(r_max).
template <Group A>
std::vector<std::size_t> normalish_profile(const SubgroupOracle<LampWreath<A>>& h,
                                           const std::vector<element_t<LampWreath<A>>>& z,
                                           const std::vector<element_t<A>>& lamp_values,
                                           std::int64_t r_max) {
  const auto& g = h.group();
  std::vector<std::size_t> out;
  for (std::int64_t r = 1; r <= r_max; ++r) {
    auto probe = lamp_probe(g, lattice_box(g.base_group(), r), lamp_values, "box");
    out.push_back(normalish_witnesses(h, z, probe).witnesses.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Walks under a built measure.

struct SrsTrajectory {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  AbcReport abc;
  std::vector<WindowTrace> traces;
  std::size_t truncations = 0;
  std::size_t recomputations = 0;
  /// Every trace stopped changing by stabilize_fraction * horizon.
  bool stabilized = false;
  /// Some final mask has a member other than the identity (the windows are
  /// nested, so this is a statement about the largest one).
  bool nontrivial = false;
  std::uint64_t fingerprint = 0;
};

/// Walk of `horizon` steps from the built measure with the window traces of
/// w_n H w_n^{-1} on the builder's Q windows and the record conditions of the
/// tile indices.
template <Group G>
SrsTrajectory srs_trajectory(const MeasureBuilder<G>& builder, const BuiltMeasure<G>& m,
                             std::size_t horizon, std::size_t index, std::uint64_t base_seed,
                             double stabilize_fraction = 0.8) {
  const auto& h = builder.subgroup();
  const G& grp = h.group();
  SrsTrajectory r;
  r.index = index;
  r.seed = derive_seed(base_seed, index);
  Rng rng(r.seed);
  TraceRecorder<G> rec(h, builder.windows());
  std::vector<std::uint64_t> indices;
  std::vector<bool> is_b;
  indices.reserve(horizon);
  is_b.reserve(horizon);
  for (std::size_t n = 0; n < horizon; ++n) {
    Step<G> s = sample_step(m, rng, &r.truncations);
    indices.push_back(s.index);
    is_b.push_back(s.is_b);
    rec.step(s.g);
  }
  r.traces = rec.finish();
  r.recomputations = rec.recomputations();
  r.abc = verify_abc(indices, is_b, builder.gauge());
  const auto limit = static_cast<std::size_t>(stabilize_fraction * static_cast<double>(horizon));
  r.stabilized = !r.traces.empty();
  r.nontrivial = false;
  for (std::size_t j = 0; j < r.traces.size(); ++j) {
    const auto& q = builder.windows()[j];
    std::optional<std::size_t> id;
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (q[i] == grp.identity()) id = i;
    }
    if (r.traces[j].stabilization_index() > limit) r.stabilized = false;
    if (r.traces[j].final_has_nonidentity(id)) r.nontrivial = true;
  }
  r.fingerprint = fingerprint(r.traces);
  return r;
}

struct SrsSummary {
  std::size_t seeds = 0;
  std::size_t abc = 0;
  std::size_t stabilized = 0;
  std::size_t nontrivial_stabilized = 0;
  std::size_t truncations = 0;
};

inline SrsSummary summarize(const std::vector<SrsTrajectory>& runs) {
  SrsSummary s;
  s.seeds = runs.size();
  for (const auto& r : runs) {
    s.abc += r.abc.k0 ? 1 : 0;
    s.stabilized += r.stabilized ? 1 : 0;
    s.nontrivial_stabilized += r.stabilized && r.nontrivial ? 1 : 0;
    s.truncations += r.truncations;
  }
  return s;
}

}  // namespace srs

#endif  // SRSLAB_WALKS_HPP
