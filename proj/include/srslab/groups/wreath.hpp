#ifndef SRSLAB_GROUPS_WREATH_HPP
#define SRSLAB_GROUPS_WREATH_HPP

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "srslab/group.hpp"
#include "srslab/groups/integers.hpp"

namespace srs {

/// B acting on itself by left multiplication; gives the ordinary wreath product.
template <Group B>
struct RegularAction {
  using point_type = element_t<B>;

  point_type act(const B& base, const element_t<B>& b, const point_type& x) const {
    return base.mul(b, x);
  }
  point_type basepoint(const B& base) const { return base.identity(); }
  std::string format_point(const B& base, const point_type& x) const { return base.format(x); }
  point_type parse_point(const B& base, std::string_view text) const { return base.parse(text); }
  /// Orbit used for the lamp subgroup; the regular action is transitive.
  bool in_main_orbit(const point_type&) const { return true; }
};

/// Point of Z^d x {0..sheets-1}.
struct SheetPoint {
  IntVec v;
  int sheet = 0;
  friend bool operator==(const SheetPoint&, const SheetPoint&) = default;
  friend auto operator<=>(const SheetPoint&, const SheetPoint&) = default;
};

/// Z^d acting by translation on several stacked copies of Z^d. Faithful, with
/// every sheet an infinite orbit; sheet 0 is the distinguished orbit.
struct SheetAction {
  using point_type = SheetPoint;
  int sheets = 2;

  point_type act(const LatticeGroup& base, const IntVec& b, const point_type& x) const {
    return {base.mul(b, x.v), x.sheet};
  }
  point_type basepoint(const LatticeGroup& base) const { return {base.identity(), 0}; }
  std::string format_point(const LatticeGroup& base, const point_type& x) const {
    return base.format(x.v) + "@" + std::to_string(x.sheet);
  }
  point_type parse_point(const LatticeGroup& base, std::string_view text) const {
    auto at = text.rfind('@');
    if (at == std::string_view::npos) throw std::invalid_argument("malformed sheet point");
    int s = static_cast<int>(detail::parse_int64(text.substr(at + 1)));
    if (s < 0 || s >= sheets) throw std::invalid_argument("sheet out of range");
    return {base.parse(text.substr(0, at)), s};
  }
  bool in_main_orbit(const point_type& x) const { return x.sheet == 0; }
};

/// (phi, b): finitely supported lamp map with no identity values, and a
/// position in the base group.
template <class Point, class AElem, class BElem>
struct WreathElement {
  std::map<Point, AElem> lamps;
  BElem pos;
  friend bool operator==(const WreathElement&, const WreathElement&) = default;
};

namespace detail {

/// Splits on `sep` at bracket depth zero.
inline std::vector<std::string_view> split_top(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == sep && depth == 0) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  out.push_back(s.substr(start));
  return out;
}

}  // namespace detail

/// Permutational wreath product A wr_X B = (sum over X of A) x| B with
/// (phi,b)(psi,c) = (phi . (b.psi), bc) and (b.psi)(x) = psi(b^{-1} x).
template <Group A, Group B, class Action = RegularAction<B>>
class WreathProduct {
 public:
  using point_type = typename Action::point_type;
  using lamp_type = element_t<A>;
  using base_type = element_t<B>;
  using element_type = WreathElement<point_type, lamp_type, base_type>;

  WreathProduct(A lamp_group, B base_group, Action action = {})
      : a_(std::move(lamp_group)), b_(std::move(base_group)), act_(std::move(action)) {}

  const A& lamp_group() const { return a_; }
  const B& base_group() const { return b_; }
  const Action& action() const { return act_; }
  point_type basepoint() const { return act_.basepoint(b_); }

  element_type identity() const { return {{}, b_.identity()}; }

  /// delta_x^a: lamp value a at x, trivial position.
  element_type lamp(const point_type& x, const lamp_type& a) const {
    element_type r = identity();
    if (!(a == a_.identity())) r.lamps.emplace(x, a);
    return r;
  }
  element_type shift(const base_type& b) const { return {{}, b}; }

  lamp_type lamp_at(const element_type& w, const point_type& x) const {
    auto it = w.lamps.find(x);
    return it == w.lamps.end() ? a_.identity() : it->second;
  }

  element_type mul(const element_type& x, const element_type& y) const {
    element_type r = x;
    right_multiply(r, y);
    return r;
  }

  /// w <- w * g, touching only the lamps of g.
  void right_multiply(element_type& w, const element_type& g) const {
    for (const auto& [y, v] : g.lamps) {
      point_type p = act_.act(b_, w.pos, y);
      auto it = w.lamps.find(p);
      if (it == w.lamps.end()) {
        w.lamps.emplace(std::move(p), v);
      } else {
        it->second = a_.mul(it->second, v);
        if (it->second == a_.identity()) w.lamps.erase(it);
      }
    }
    w.pos = b_.mul(w.pos, g.pos);
  }

  element_type inv(const element_type& x) const {
    element_type r;
    r.pos = b_.inv(x.pos);
    for (const auto& [y, v] : x.lamps) r.lamps.emplace(act_.act(b_, r.pos, y), a_.inv(v));
    return r;
  }

  /// w^{-1} q w. For lamp-only q this is the lamp map
  /// b^{-1}x -> phi(x)^{-1} chi(x) phi(x) on the support of chi.
  element_type conj(const element_type& w, const element_type& q) const {
    if (!(q.pos == b_.identity())) return mul(inv(w), mul(q, w));
    element_type r = identity();
    base_type binv = b_.inv(w.pos);
    for (const auto& [x, chi] : q.lamps) {
      lamp_type phi = lamp_at(w, x);
      r.lamps.emplace(act_.act(b_, binv, x), a_.mul(a_.inv(phi), a_.mul(chi, phi)));
    }
    return r;
  }

  /// Lamp generators at the basepoint, then base generators.
  std::vector<element_type> generators() const {
    std::vector<element_type> g;
    for (const auto& s : a_.generators()) g.push_back(lamp(basepoint(), s));
    for (const auto& s : b_.generators()) g.push_back(shift(s));
    return g;
  }

  /// "{x:a,...};b".
  std::string format(const element_type& w) const {
    std::string s = "{";
    bool first = true;
    for (const auto& [x, v] : w.lamps) {
      if (!first) s += ',';
      first = false;
      s += act_.format_point(b_, x) + ":" + a_.format(v);
    }
    return s + "};" + b_.format(w.pos);
  }

  element_type parse(std::string_view text) const {
    auto parts = detail::split_top(text, ';');
    if (parts.size() != 2 || parts[0].size() < 2 || parts[0].front() != '{' ||
        parts[0].back() != '}') {
      throw std::invalid_argument("malformed wreath element: " + std::string(text));
    }
    element_type r;
    r.pos = b_.parse(parts[1]);
    auto body = parts[0].substr(1, parts[0].size() - 2);
    if (!body.empty()) {
      for (auto entry : detail::split_top(body, ',')) {
        auto kv = detail::split_top(entry, ':');
        if (kv.size() != 2) throw std::invalid_argument("malformed lamp entry");
        auto v = a_.parse(kv[1]);
        if (v == a_.identity()) throw std::invalid_argument("identity lamp value stored");
        if (!r.lamps.emplace(act_.parse_point(b_, kv[0]), v).second) {
          throw std::invalid_argument("duplicate lamp site");
        }
      }
    }
    return r;
  }

  std::string name() const { return a_.name() + " wr " + b_.name(); }

 private:
  A a_;
  B b_;
  Action act_;
};

}  // namespace srs

template <>
struct std::hash<srs::SheetPoint> {
  std::size_t operator()(const srs::SheetPoint& p) const {
    return srs::hash_combine(std::hash<srs::IntVec>{}(p.v), static_cast<std::size_t>(p.sheet));
  }
};

template <class Point, class AElem, class BElem>
struct std::hash<srs::WreathElement<Point, AElem, BElem>> {
  std::size_t operator()(const srs::WreathElement<Point, AElem, BElem>& w) const {
    std::size_t h = std::hash<BElem>{}(w.pos);
    for (const auto& [x, v] : w.lamps) {
      h = srs::hash_combine(h, std::hash<Point>{}(x));
      h = srs::hash_combine(h, std::hash<AElem>{}(v));
    }
    return h;
  }
};

#endif  // SRSLAB_GROUPS_WREATH_HPP
