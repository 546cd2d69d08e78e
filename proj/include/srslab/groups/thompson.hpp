#ifndef SRSLAB_GROUPS_THOMPSON_HPP
#define SRSLAB_GROUPS_THOMPSON_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "srslab/dyadic.hpp"
#include "srslab/group.hpp"

namespace srs {

/// x -> 2^k x + q.
struct Affine {
  std::int64_t k = 0;
  Dyadic q;

  Dyadic operator()(const Dyadic& x) const { return x.scaled(k) + q; }
  Affine inverse() const { return {-k, -q.scaled(-k)}; }
  /// (*this) o g.
  Affine after(const Affine& g) const { return {k + g.k, g.q.scaled(k) + q}; }
  bool is_identity() const { return k == 0 && q.is_zero(); }

  friend bool operator==(const Affine&, const Affine&) = default;
};

/// Piecewise affine homeomorphism of R. Breakpoints are strictly increasing;
/// pieces[i] applies on (bp[i-1], bp[i]) with pieces.front() and pieces.back()
/// covering the unbounded components. Adjacent pieces always differ.
///
/// Elements of F have slope-one integer-offset end pieces. The same type is
/// used for restrictions of elements to bounded intervals, whose end pieces are
/// extensions of interior pieces.
struct PLMap {
  std::vector<Dyadic> bp;
  std::vector<Affine> pieces{Affine{}};

  friend bool operator==(const PLMap&, const PLMap&) = default;

  std::size_t piece_index(const Dyadic& x) const {
    return static_cast<std::size_t>(std::upper_bound(bp.begin(), bp.end(), x) - bp.begin());
  }
  Dyadic operator()(const Dyadic& x) const { return pieces[piece_index(x)](x); }

  /// Image of breakpoint i.
  Dyadic image_of_bp(std::size_t i) const { return pieces[i](bp[i]); }

  /// The unique x with f(x) = y.
  Dyadic preimage(const Dyadic& y) const {
    std::size_t lo = 0, hi = bp.size();
    // First breakpoint whose image is >= y.
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (image_of_bp(mid) < y) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return pieces[lo].inverse()(y);
  }

  bool is_identity() const { return bp.empty() && pieces[0].is_identity(); }

  const Affine& left_end() const { return pieces.front(); }
  const Affine& right_end() const { return pieces.back(); }

  /// Compact support: identity outside [bp.front(), bp.back()].
  bool compactly_supported() const {
    return left_end().is_identity() && right_end().is_identity();
  }

  void canonicalize() {
    std::vector<Dyadic> nbp;
    std::vector<Affine> np;
    np.push_back(pieces[0]);
    for (std::size_t i = 0; i < bp.size(); ++i) {
      if (pieces[i + 1] == np.back()) continue;
      nbp.push_back(std::move(bp[i]));
      np.push_back(std::move(pieces[i + 1]));
    }
    bp = std::move(nbp);
    pieces = std::move(np);
  }

  std::size_t hash() const {
    std::size_t h = bp.size();
    for (const auto& b : bp) h = hash_combine(h, b.hash());
    for (const auto& p : pieces) {
      h = hash_combine(h, std::hash<std::int64_t>{}(p.k));
      h = hash_combine(h, p.q.hash());
    }
    return h;
  }
};

/// f o g. Breakpoints of the result lie in bp(g) union g^{-1}(bp(f)).
inline PLMap compose(const PLMap& f, const PLMap& g) {
  // Preimages of f's breakpoints under g, in increasing order.
  std::vector<Dyadic> pre;
  pre.reserve(f.bp.size());
  std::size_t j = 0;
  for (const auto& y : f.bp) {
    while (j < g.bp.size() && g.image_of_bp(j) < y) ++j;
    pre.push_back(g.pieces[j].inverse()(y));
  }
  PLMap r;
  r.bp.clear();
  r.pieces.clear();
  r.bp.reserve(g.bp.size() + pre.size());
  r.pieces.reserve(g.bp.size() + pre.size() + 1);
  std::size_t gi = 0, fi = 0;
  r.pieces.push_back(f.pieces[0].after(g.pieces[0]));
  while (gi < g.bp.size() || fi < pre.size()) {
    bool take_g = fi == pre.size() || (gi < g.bp.size() && g.bp[gi] <= pre[fi]);
    bool take_f = gi == g.bp.size() || (fi < pre.size() && pre[fi] <= g.bp[gi]);
    r.bp.push_back(take_g ? g.bp[gi] : pre[fi]);
    if (take_g) ++gi;
    if (take_f) ++fi;
    r.pieces.push_back(f.pieces[fi].after(g.pieces[gi]));
  }
  r.canonicalize();
  return r;
}

inline PLMap inverse(const PLMap& f) {
  PLMap r;
  r.bp.reserve(f.bp.size());
  for (std::size_t i = 0; i < f.bp.size(); ++i) r.bp.push_back(f.image_of_bp(i));
  r.pieces.clear();
  r.pieces.reserve(f.pieces.size());
  for (const auto& p : f.pieces) r.pieces.push_back(p.inverse());
  return r;
}

/// A map that agrees with f on [a, b] and extends its pieces at a and b.
inline PLMap restrict_to(const PLMap& f, const Dyadic& a, const Dyadic& b) {
  std::size_t lo = f.piece_index(a);
  std::size_t hi = f.piece_index(b);
  PLMap r;
  r.bp.assign(f.bp.begin() + static_cast<std::ptrdiff_t>(lo),
              f.bp.begin() + static_cast<std::ptrdiff_t>(hi));
  r.pieces.assign(f.pieces.begin() + static_cast<std::ptrdiff_t>(lo),
                  f.pieces.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
  return r;
}

/// Thompson's group F realized as piecewise dyadic affine homeomorphisms of R
/// with integer translations near +-infinity. The product is composition:
/// mul(g, h) = g o h.
class ThompsonGroup {
 public:
  using element_type = PLMap;

  element_type identity() const { return {}; }
  element_type mul(const element_type& x, const element_type& y) const { return compose(x, y); }
  element_type inv(const element_type& x) const { return inverse(x); }

  /// w^{-1} q w. When q is compactly supported only the part of w over
  /// w^{-1}(supp q) matters.
  element_type conj(const element_type& w, const element_type& q) const {
    if (q.is_identity()) return q;
    if (!q.compactly_supported()) return compose(inverse(w), compose(q, w));
    Dyadic a = w.preimage(q.bp.front());
    Dyadic b = w.preimage(q.bp.back());
    PLMap wr = restrict_to(w, a, b);
    return compose(inverse(wr), compose(q, wr));
  }

  static element_type translation(std::int64_t m) {
    PLMap t;
    t.pieces[0].q = Dyadic(m);
    return t;
  }

  /// t_k f t_k^{-1}: f moved right by k.
  static element_type shifted(const element_type& f, std::int64_t k) {
    if (f.is_identity()) return f;
    PLMap r = f;
    Dyadic dk(k);
    for (auto& b : r.bp) b += dk;
    // x -> 2^s (x - k) + q + k.
    for (auto& p : r.pieces) p.q = p.q + dk - dk.scaled(p.k);
    return r;
  }

  /// Breakpoints (1/4, 3/8, 1/2, 3/4) with maps 2x - 1/4, x + 1/8, x/2 + 3/8.
  static element_type default_f() {
    PLMap f;
    f.bp = {Dyadic(mpz_class(1), 2), Dyadic(mpz_class(3), 3), Dyadic(mpz_class(1), 1),
            Dyadic(mpz_class(3), 2)};
    f.pieces = {Affine{}, Affine{1, Dyadic(mpz_class(-1), 2)}, Affine{0, Dyadic(mpz_class(1), 3)},
                Affine{-1, Dyadic(mpz_class(3), 3)}, Affine{}};
    validate(f);
    return f;
  }

  /// x for x <= 0, 2x on [0,1], x + 1 for x >= 1. Together with t_1 it
  /// generates F.
  static element_type standard_b() {
    PLMap f;
    f.bp = {Dyadic(0), Dyadic(1)};
    f.pieces = {Affine{}, Affine{1, Dyadic(0)}, Affine{0, Dyadic(1)}};
    return f;
  }

  /// t_1, t_1^{-1}, B, B^{-1}.
  std::vector<element_type> generators() const {
    auto b = standard_b();
    return {translation(1), translation(-1), b, inverse(b)};
  }

  /// Throws unless f is a canonical element of F.
  static void validate(const element_type& f) {
    if (f.pieces.size() != f.bp.size() + 1) throw std::invalid_argument("piece count mismatch");
    for (std::size_t i = 1; i < f.bp.size(); ++i) {
      if (!(f.bp[i - 1] < f.bp[i])) throw std::invalid_argument("breakpoints not increasing");
    }
    for (const auto* end : {&f.pieces.front(), &f.pieces.back()}) {
      if (end->k != 0 || !end->q.is_integer()) {
        throw std::invalid_argument("end pieces must be integer translations");
      }
    }
    for (std::size_t i = 0; i < f.bp.size(); ++i) {
      if (f.pieces[i] == f.pieces[i + 1]) throw std::invalid_argument("redundant breakpoint");
      if (!(f.pieces[i](f.bp[i]) == f.pieces[i + 1](f.bp[i]))) {
        throw std::invalid_argument("discontinuous at breakpoint");
      }
    }
  }

  /// Alternating piece/breakpoint table: "k:q|bp|k:q|...".
  std::string format(const element_type& f) const {
    std::string s;
    for (std::size_t i = 0; i < f.pieces.size(); ++i) {
      if (i) s += "|" + f.bp[i - 1].str() + "|";
      s += std::to_string(f.pieces[i].k) + ":" + f.pieces[i].q.str();
    }
    return s;
  }

  element_type parse(std::string_view text) const {
    PLMap f;
    f.pieces.clear();
    std::size_t field = 0;
    while (true) {
      auto bar = text.find('|');
      auto tok = text.substr(0, bar);
      if (field % 2 == 0) {
        auto colon = tok.find(':');
        if (colon == std::string_view::npos) throw std::invalid_argument("malformed piece");
        f.pieces.push_back(Affine{std::stoll(std::string(tok.substr(0, colon))),
                                  Dyadic::parse(tok.substr(colon + 1))});
      } else {
        f.bp.push_back(Dyadic::parse(tok));
      }
      ++field;
      if (bar == std::string_view::npos) break;
      text = text.substr(bar + 1);
    }
    validate(f);
    return f;
  }

  std::string name() const { return "F"; }
};

}  // namespace srs

template <>
struct std::hash<srs::PLMap> {
  std::size_t operator()(const srs::PLMap& f) const { return f.hash(); }
};

#endif  // SRSLAB_GROUPS_THOMPSON_HPP
