#ifndef SRSLAB_CHABAUTY_HPP
#define SRSLAB_CHABAUTY_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "srslab/group.hpp"
#include "srslab/hashing.hpp"

namespace srs {

enum class Membership : std::uint8_t { no = 0, yes = 1, undetermined = 2 };

inline Membership from_bool(bool b) { return b ? Membership::yes : Membership::no; }

inline char to_char(Membership m) {
  switch (m) {
    case Membership::no: return '0';
    case Membership::yes: return '1';
    default: return '?';
  }
}

/// Finite list of distinct elements in a fixed order.
template <Group G>
class Window {
 public:
  using E = element_t<G>;

  Window() = default;
  explicit Window(std::string label) : label_(std::move(label)) {}
  Window(std::string label, const std::vector<E>& elements) : label_(std::move(label)) {
    for (const auto& e : elements) insert(e);
  }

  /// Appends x unless already present; returns whether it was added.
  bool insert(const E& x) {
    if (!index_.insert(x).second) return false;
    elements_.push_back(x);
    return true;
  }
  bool contains(const E& x) const { return index_.count(x) > 0; }

  const std::vector<E>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  const E& operator[](std::size_t i) const { return elements_[i]; }
  const std::string& label() const { return label_; }
  void set_label(std::string l) { label_ = std::move(l); }

 private:
  std::string label_;
  std::vector<E> elements_;
  std::unordered_set<E> index_;
};

enum class SubgroupFamily {
  trivial,
  cyclic_a_in_bs,
  thompson_h,
  wreath_diagonal,
  perm_wreath_sum,
  conjugate,
  intersection,
};

inline const char* to_string(SubgroupFamily f) {
  switch (f) {
    case SubgroupFamily::trivial: return "TrivialSubgroup";
    case SubgroupFamily::cyclic_a_in_bs: return "CyclicA_inBS";
    case SubgroupFamily::thompson_h: return "ThompsonH";
    case SubgroupFamily::wreath_diagonal: return "WreathDiagonal";
    case SubgroupFamily::perm_wreath_sum: return "PermWreathSum";
    case SubgroupFamily::conjugate: return "Conjugate";
    case SubgroupFamily::intersection: return "FiniteIntersection";
  }
  return "?";
}

/// A subgroup given by a decidable (possibly truncated) membership predicate.
///
/// Optional hints speed up trajectory traces without changing answers:
/// `ambient` is a normal subgroup containing H (x outside it is in no
/// conjugate of H), `normalizes` is a sufficient test for gHg^{-1} = H, and
/// `shortcut(w, q, q_in_h)` may decide w^{-1} q w in H without forming the
/// conjugate.
template <Group G>
class SubgroupOracle {
 public:
  using E = element_t<G>;
  using Predicate = std::function<Membership(const E&)>;
  using Test = std::function<bool(const E&)>;
  /// Answers for w^{-1} q w with w fixed, or nullopt to fall back to the
  /// direct test. Built once per w by a Shortcut.
  using Prepared = std::function<std::optional<Membership>(const E&, Membership)>;
  using Shortcut = std::function<Prepared(const E&)>;

  SubgroupOracle(std::shared_ptr<const G> group, SubgroupFamily family, std::string description,
                 Predicate contains, Test ambient = nullptr, Test normalizes = nullptr,
                 Shortcut shortcut = nullptr)
      : group_(std::move(group)),
        family_(family),
        description_(std::move(description)),
        contains_(std::move(contains)),
        ambient_(std::move(ambient)),
        normalizes_(std::move(normalizes)),
        shortcut_(std::move(shortcut)) {}

  Membership contains(const E& x) const { return contains_(x); }
  bool in_ambient(const E& x) const { return !ambient_ || ambient_(x); }
  bool normalized_by(const E& g) const { return normalizes_ && normalizes_(g); }
  bool has_ambient() const { return static_cast<bool>(ambient_); }

  /// Membership of w^{-1} q w, given the membership of q itself.
  Membership conjugate_contains(const E& w, const E& q, Membership q_in_h) const {
    return conjugator(w)(q, q_in_h);
  }

  /// conjugate_contains for a fixed w, for use across many q.
  std::function<Membership(const E&, Membership)> conjugator(const E& w) const {
    Prepared p = shortcut_ ? shortcut_(w) : nullptr;
    return [this, w, p = std::move(p)](const E& q, Membership q_in_h) {
      if (p) {
        if (auto m = p(q, q_in_h)) return *m;
      }
      return contains(conjugate_by(*group_, w, q));
    };
  }

  SubgroupFamily family() const { return family_; }
  const std::string& description() const { return description_; }
  const G& group() const { return *group_; }
  std::shared_ptr<const G> group_ptr() const { return group_; }

  /// g H g^{-1}: x is a member iff g^{-1} x g is in H.
  SubgroupOracle conjugate(const E& g) const {
    auto grp = group_;
    auto inner = *this;
    Predicate pred = [grp, inner, g](const E& x) {
      return inner.contains(conjugate_by(*grp, g, x));
    };
    Test norm = nullptr;
    if (normalizes_) {
      norm = [grp, inner, g](const E& h) {
        return inner.normalized_by(conjugate_by(*grp, g, h));
      };
    }
    return SubgroupOracle(group_, SubgroupFamily::conjugate,
                          "Conjugate(" + group_->format(g) + "," + description_ + ")",
                          std::move(pred), ambient_, std::move(norm));
  }

  static SubgroupOracle intersection(const std::vector<SubgroupOracle>& parts) {
    if (parts.empty()) throw std::invalid_argument("empty intersection");
    std::string d = "FiniteIntersection(";
    for (std::size_t i = 0; i < parts.size(); ++i) d += (i ? "," : "") + parts[i].description();
    d += ")";
    Predicate pred = [parts](const E& x) {
      bool undetermined = false;
      for (const auto& p : parts) {
        auto m = p.contains(x);
        if (m == Membership::no) return Membership::no;
        if (m == Membership::undetermined) undetermined = true;
      }
      return undetermined ? Membership::undetermined : Membership::yes;
    };
    Test amb = [parts](const E& x) {
      for (const auto& p : parts) {
        if (!p.in_ambient(x)) return false;
      }
      return true;
    };
    Test norm = [parts](const E& g) {
      for (const auto& p : parts) {
        if (!p.normalized_by(g)) return false;
      }
      return true;
    };
    return SubgroupOracle(parts.front().group_ptr(), SubgroupFamily::intersection, d,
                          std::move(pred), std::move(amb), std::move(norm));
  }

 private:
  std::shared_ptr<const G> group_;
  SubgroupFamily family_;
  std::string description_;
  Predicate contains_;
  Test ambient_;
  Test normalizes_;
  Shortcut shortcut_;
};

/// Membership of each window element, in window order.
template <Group G>
std::vector<Membership> window_intersect(const SubgroupOracle<G>& h, const Window<G>& q) {
  std::vector<Membership> out;
  out.reserve(q.size());
  for (const auto& x : q.elements()) {
    out.push_back(h.in_ambient(x) ? h.contains(x) : Membership::no);
  }
  return out;
}

/// The elements of Q that lie in H.
template <Group G>
std::vector<element_t<G>> window_members(const SubgroupOracle<G>& h, const Window<G>& q) {
  std::vector<element_t<G>> out;
  auto m = window_intersect(h, q);
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (m[i] == Membership::yes) out.push_back(q[i]);
  }
  return out;
}

/// Q n H = Q n K. Undetermined cells make the answer undetermined unless some
/// decided cell already differs.
template <Group G>
Membership neighborhood_equal(const SubgroupOracle<G>& h, const SubgroupOracle<G>& k,
                              const Window<G>& q) {
  bool undetermined = false;
  for (const auto& x : q.elements()) {
    auto a = h.in_ambient(x) ? h.contains(x) : Membership::no;
    auto b = k.in_ambient(x) ? k.contains(x) : Membership::no;
    if (a == Membership::undetermined || b == Membership::undetermined) {
      undetermined = true;
    } else if (a != b) {
      return Membership::no;
    }
  }
  return undetermined ? Membership::undetermined : Membership::yes;
}

template <Group G>
struct WitnessResult {
  std::vector<element_t<G>> witnesses;
  std::size_t undetermined = 0;
};

/// Elements x of the probe window with x in zHz^{-1} for every z in Z.
template <Group G>
WitnessResult<G> normalish_witnesses(const SubgroupOracle<G>& h, const std::vector<element_t<G>>& z,
                                     const Window<G>& probe) {
  WitnessResult<G> r;
  const G& grp = h.group();
  for (const auto& x : probe.elements()) {
    bool all = true, unknown = false;
    for (const auto& zz : z) {
      // x in z H z^{-1}  <=>  z^{-1} x z in H.
      auto m = h.contains(conjugate_by(grp, zz, x));
      if (m == Membership::no) {
        all = false;
        break;
      }
      if (m == Membership::undetermined) unknown = true;
    }
    if (!all) continue;
    if (unknown) {
      ++r.undetermined;
    } else {
      r.witnesses.push_back(x);
    }
  }
  return r;
}

/// Bitmask sequence n -> Q n K_n over one window, stored as change points.
struct WindowTrace {
  std::string label;
  std::size_t window_size = 0;
  /// (step, bitmask) at step 0 and at every step where the bitmask changed.
  std::vector<std::pair<std::size_t, std::string>> changes;
  std::size_t horizon = 0;

  /// Bitmask at step n (one char per window element: '0', '1' or '?').
  const std::string& at(std::size_t n) const {
    std::size_t lo = 0;
    for (std::size_t i = 0; i < changes.size() && changes[i].first <= n; ++i) lo = i;
    return changes[lo].second;
  }
  const std::string& final_mask() const { return changes.back().second; }
  /// Last step at which the bitmask changed (0 if it never did).
  std::size_t stabilization_index() const { return changes.back().first; }
  bool has_undetermined() const {
    for (const auto& c : changes) {
      if (c.second.find('?') != std::string::npos) return true;
    }
    return false;
  }
  /// Whether the final bitmask contains a member other than `identity_index`.
  bool final_has_nonidentity(std::optional<std::size_t> identity_index) const {
    const auto& m = final_mask();
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == '1' && (!identity_index || i != *identity_index)) return true;
    }
    return false;
  }

  /// "step,window_label,bitmask_hex,changed" rows (change points only).
  std::string csv_rows() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < changes.size(); ++i) {
      os << changes[i].first << ',' << label << ',' << mask_hex(changes[i].second) << ','
         << (i > 0 ? 1 : 0) << '\n';
    }
    return os.str();
  }

  /// Packs '1' cells into hex, four cells per digit; '?' cells are marked
  /// with a trailing "?<count>".
  static std::string mask_hex(const std::string& mask) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    std::size_t unknown = 0;
    for (std::size_t i = 0; i < mask.size(); i += 4) {
      int v = 0;
      for (std::size_t j = 0; j < 4 && i + j < mask.size(); ++j) {
        if (mask[i + j] == '1') v |= 1 << j;
        if (mask[i + j] == '?') ++unknown;
      }
      out += digits[v];
    }
    if (unknown) out += "?" + std::to_string(unknown);
    return out.empty() ? "0" : out;
  }
};

/// Fingerprint of the final bitmasks of several windows.
inline std::uint64_t fingerprint(const std::vector<WindowTrace>& traces) {
  Fnv1a h;
  for (const auto& t : traces) {
    h.update(t.label).update("=").update(t.final_mask()).update(";");
  }
  return h.value();
}

/// Follows K_n = w_n H w_n^{-1} along a trajectory on a fixed family of
/// windows. Steps that normalize H leave K_n unchanged and are only folded
/// into a pending product; the running product is materialized when a
/// recomputation is needed. Elements shared between windows are tested once.
template <Group G>
class TraceRecorder {
 public:
  using E = element_t<G>;

  TraceRecorder(SubgroupOracle<G> h, std::vector<Window<G>> windows)
      : h_(std::move(h)), windows_(std::move(windows)) {
    const G& g = h_.group();
    w_ = g.identity();
    pending_ = g.identity();
    std::unordered_map<E, std::size_t> index;
    for (const auto& q : windows_) {
      WindowTrace t;
      t.label = q.label();
      t.window_size = q.size();
      std::vector<std::size_t> slots;
      for (const auto& x : q.elements()) {
        auto [it, fresh] = index.emplace(x, pool_.size());
        if (fresh) {
          pool_.push_back(x);
          bool amb = h_.in_ambient(x);
          ambient_.push_back(amb);
          base_.push_back(amb ? h_.contains(x) : Membership::no);
        }
        slots.push_back(it->second);
      }
      slots_.push_back(std::move(slots));
      traces_.push_back(std::move(t));
    }
    recompute(0);
  }

  /// Records step n (1-based) with increment g.
  void step(const E& g) {
    ++n_;
    const G& grp = h_.group();
    if (h_.normalized_by(g)) {
      pending_ = grp.mul(pending_, g);
      ++skipped_;
      return;
    }
    w_ = grp.mul(w_, grp.mul(pending_, g));
    pending_ = grp.identity();
    recompute(n_);
  }

  /// Running product w_n.
  E product() const { return h_.group().mul(w_, pending_); }

  std::vector<WindowTrace> finish() {
    for (auto& t : traces_) t.horizon = n_;
    return traces_;
  }
  const std::vector<WindowTrace>& traces() const { return traces_; }
  std::size_t recomputations() const { return recomputations_; }
  std::size_t skipped() const { return skipped_; }

 private:
  void recompute(std::size_t n) {
    ++recomputations_;
    std::string cell(pool_.size(), '0');
    auto conj = h_.conjugator(w_);
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (!ambient_[i]) continue;
      // q in w H w^{-1}  <=>  w^{-1} q w in H.
      cell[i] = to_char(conj(pool_[i], base_[i]));
    }
    for (std::size_t j = 0; j < windows_.size(); ++j) {
      std::string mask(slots_[j].size(), '0');
      for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = cell[slots_[j][i]];
      auto& t = traces_[j];
      if (t.changes.empty() || t.changes.back().second != mask) t.changes.emplace_back(n, std::move(mask));
    }
  }

  SubgroupOracle<G> h_;
  std::vector<Window<G>> windows_;
  std::vector<E> pool_;
  std::vector<bool> ambient_;
  std::vector<Membership> base_;
  std::vector<std::vector<std::size_t>> slots_;
  std::vector<WindowTrace> traces_;
  E w_;
  E pending_;
  std::size_t n_ = 0;
  std::size_t recomputations_ = 0;
  std::size_t skipped_ = 0;
};

}  // namespace srs

#endif  // SRSLAB_CHABAUTY_HPP
