#ifndef SRSLAB_BASS_SERRE_HPP
#define SRSLAB_BASS_SERRE_HPP

#include <gmpxx.h>

#include <cstdint>
#include <cstdlib>
#include <deque>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "srslab/groups/baumslag_solitar.hpp"

namespace srs {

/// Vertex w<a> of the Bass-Serre tree, stored as the normal form of w with
/// its trailing a-power removed. Equal cosets have equal representatives.
using TreeVertex = BSWord;

struct Elliptic {
  TreeVertex fixed;
};
struct Loxodromic {
  std::size_t translation_length = 0;
};
struct Unknown {};
using Classification = std::variant<Elliptic, Loxodromic, Unknown>;

/// Neighbor of v across one edge: v a^l t (out, l < |n|) or v a^j t^{-1}
/// (in, j < |m|).
struct TreeEdge {
  TreeVertex to;
  int sign = 1;
  std::int64_t label = 0;
};

struct TreeBall {
  std::vector<TreeVertex> vertices;
  /// BFS tree: parent index (-1 for the center), edge sign and label, depth.
  std::vector<long> parent;
  std::vector<int> sign;
  std::vector<std::int64_t> label;
  std::vector<std::size_t> depth;
  /// Adjacent pairs with both ends in the ball, counted once.
  std::size_t edges = 0;
  /// A vertex reached twice through different parents.
  bool cycle_found = false;
};

struct FixedSubtree {
  std::vector<TreeVertex> vertices;
  bool loxodromic = false;
  bool unknown = false;
};

/// The Bass-Serre tree of BS(m, n) = <a, t | t a^m t^{-1} = a^n> on the cosets
/// of <a>, with oriented edges w<a> -> w a^l t<a>.
class BassSerreTree {
 public:
  explicit BassSerreTree(BaumslagSolitarGroup group) : g_(std::move(group)) {
    if (std::llabs(g_.m()) < 2 || std::llabs(g_.n()) < 2) {
      throw std::invalid_argument("Bass-Serre tree needs |m|, |n| >= 2");
    }
  }

  const BaumslagSolitarGroup& group() const { return g_; }

  TreeVertex root() const { return g_.identity(); }

  TreeVertex vertex(BSWord w) const {
    w.exps.back() = 0;
    return w;
  }

  TreeVertex act(const BSWord& x, const TreeVertex& v) const { return vertex(g_.mul(x, v)); }

  std::int64_t height(const TreeVertex& v) const { return v.height(); }

  std::vector<TreeEdge> neighbors(const TreeVertex& v) const {
    std::vector<TreeEdge> out;
    const std::int64_t am = std::llabs(g_.m()), an = std::llabs(g_.n());
    for (std::int64_t l = 0; l < an; ++l) out.push_back({step(v, l, 1), 1, l});
    for (std::int64_t j = 0; j < am; ++j) out.push_back({step(v, j, -1), -1, j});
    return out;
  }

  bool adjacent(const TreeVertex& u, const TreeVertex& v) const { return distance(u, v) == 1; }

  /// The geodesic from u to v follows the t-letters of the normal form of
  /// rep(u)^{-1} rep(v), which has no pinch.
  std::size_t distance(const TreeVertex& u, const TreeVertex& v) const {
    return g_.mul(g_.inv(u), v).t_length();
  }

  /// Vertices of the geodesic from u to v, both ends included.
  std::vector<TreeVertex> geodesic(const TreeVertex& u, const TreeVertex& v) const {
    BSWord x = g_.mul(g_.inv(u), v);
    std::vector<TreeVertex> path{u};
    BSWord prefix = u;
    for (std::size_t i = 0; i < x.signs.size(); ++i) {
      g_.append_a(prefix, x.exps[i]);
      g_.append_t(prefix, x.signs[i]);
      path.push_back(vertex(prefix));
    }
    return path;
  }

  /// Displacement descent: replace v by the midpoint of [v, gv] until the
  /// displacement is 0 (elliptic) or repeats a positive value (loxodromic).
  /// Unknown once v leaves the ball of `radius` around v0.
  Classification classify(const BSWord& x, const TreeVertex& v0, std::size_t radius) const {
    if (radius == 0) throw std::invalid_argument("radius must be positive");
    TreeVertex v = v0;
    std::optional<std::size_t> last;
    for (std::size_t it = 0; it <= radius + 2; ++it) {
      if (distance(v0, v) > radius) return Unknown{};
      TreeVertex xv = act(x, v);
      std::size_t d = distance(v, xv);
      if (d == 0) return Elliptic{v};
      if (last && *last == d) return Loxodromic{d};
      last = d;
      auto path = geodesic(v, xv);
      v = path[d / 2];
    }
    return Unknown{};
  }

  bool fixes(const BSWord& x, const TreeVertex& v) const { return act(x, v) == v; }

  /// The k with rep^{-1} x rep = a^k for a nontrivial x fixing v.
  std::int64_t zeta(const BSWord& x, const TreeVertex& v) const {
    if (x == g_.identity()) throw std::invalid_argument("zeta of the identity");
    BSWord c = g_.mul(g_.inv(v), g_.mul(x, v));
    if (!c.is_power_of_a()) throw std::invalid_argument("element does not fix the vertex");
    return c.exps[0];
  }

  TreeBall ball(const TreeVertex& center, std::size_t radius) const {
    TreeBall b;
    std::unordered_map<TreeVertex, std::size_t> index;
    b.vertices.push_back(center);
    b.parent.push_back(-1);
    b.sign.push_back(0);
    b.label.push_back(0);
    b.depth.push_back(0);
    index.emplace(center, 0);
    for (std::size_t i = 0; i < b.vertices.size(); ++i) {
      if (b.depth[i] == radius) continue;
      TreeVertex v = b.vertices[i];
      for (const auto& e : neighbors(v)) {
        auto it = index.find(e.to);
        if (it != index.end()) {
          if (static_cast<long>(it->second) != b.parent[i]) b.cycle_found = true;
          continue;
        }
        index.emplace(e.to, b.vertices.size());
        b.vertices.push_back(e.to);
        b.parent.push_back(static_cast<long>(i));
        b.sign.push_back(e.sign);
        b.label.push_back(e.label);
        b.depth.push_back(b.depth[i] + 1);
      }
    }
    std::size_t ends = 0;
    for (const auto& v : b.vertices) {
      for (const auto& e : neighbors(v)) ends += index.count(e.to);
    }
    b.edges = ends / 2;
    return b;
  }

  /// "parent,child,edge,height" rows; edge is "l=<l>" for v -> v a^l t and
  /// "j=<j>" for v -> v a^j t^{-1}.
  std::string ball_csv(const TreeBall& b) const {
    std::ostringstream os;
    os << "parent,child,edge,height\n";
    for (std::size_t i = 1; i < b.vertices.size(); ++i) {
      os << g_.format(b.vertices[static_cast<std::size_t>(b.parent[i])]) << ','
         << g_.format(b.vertices[i]) << ',' << (b.sign[i] > 0 ? "l=" : "j=") << b.label[i] << ','
         << height(b.vertices[i]) << '\n';
    }
    return os.str();
  }

  /// Fixed vertices within `radius` of a fixed vertex found by classify from
  /// the root. The fixed set is a subtree, so the search only walks through
  /// fixed vertices.
  FixedSubtree fixed_subtree(const BSWord& x, std::size_t radius) const {
    FixedSubtree out;
    if (x == g_.identity()) {
      out.vertices = ball(root(), radius).vertices;
      return out;
    }
    auto c = classify(x, root(), radius + 2);
    if (std::holds_alternative<Loxodromic>(c)) {
      out.loxodromic = true;
      return out;
    }
    if (std::holds_alternative<Unknown>(c)) {
      out.unknown = true;
      return out;
    }
    TreeVertex start = std::get<Elliptic>(c).fixed;
    std::unordered_map<TreeVertex, std::size_t> depth{{start, 0}};
    out.vertices.push_back(start);
    for (std::size_t i = 0; i < out.vertices.size(); ++i) {
      TreeVertex v = out.vertices[i];
      std::size_t dv = depth.at(v);
      if (dv == radius) continue;
      for (const auto& e : neighbors(v)) {
        if (depth.count(e.to) || !fixes(x, e.to)) continue;
        depth.emplace(e.to, dv + 1);
        out.vertices.push_back(e.to);
      }
    }
    return out;
  }

  /// zeta(v') = (m/n)^{h(v') - h(v)} zeta(v) for every pair of fixed vertices,
  /// compared as integers after clearing denominators.
  bool zeta_relation_check(const BSWord& x, std::size_t radius) const {
    auto fixed = fixed_subtree(x, radius);
    if (fixed.loxodromic || fixed.unknown) return false;
    std::vector<std::pair<std::int64_t, mpz_class>> hz;
    for (const auto& v : fixed.vertices) hz.emplace_back(height(v), mpz_class(static_cast<long>(zeta(x, v))));
    const mpz_class m(static_cast<long>(g_.m())), n(static_cast<long>(g_.n()));
    for (std::size_t i = 0; i < hz.size(); ++i) {
      for (std::size_t j = 0; j < hz.size(); ++j) {
        std::int64_t dh = hz[j].first - hz[i].first;
        mpz_class left = hz[j].second, right = hz[i].second;
        mpz_class pm, pn;
        mpz_pow_ui(pm.get_mpz_t(), m.get_mpz_t(), static_cast<unsigned long>(std::llabs(dh)));
        mpz_pow_ui(pn.get_mpz_t(), n.get_mpz_t(), static_cast<unsigned long>(std::llabs(dh)));
        if (dh >= 0 ? left * pn != pm * right : left * pm != pn * right) return false;
      }
    }
    return true;
  }

  /// Heights a vertex fixed by x can have, given a fixed vertex v0: with
  /// gcd(m, n) = 1, zeta(v0) (m/n)^d is an integer only if n^d divides
  /// zeta(v0) (d > 0), or m^{-d} does (d < 0). Independent of any radius.
  std::optional<std::pair<std::int64_t, std::int64_t>> fixed_height_bounds(const BSWord& x,
                                                                          const TreeVertex& v0) const {
    const std::int64_t am = std::llabs(g_.m()), an = std::llabs(g_.n());
    if (std::gcd(am, an) != 1) return std::nullopt;
    std::int64_t z = std::llabs(zeta(x, v0));
    auto multiplicity = [z](std::int64_t b) {
      std::int64_t k = 0;
      for (std::int64_t r = z; r % b == 0; r /= b) ++k;
      return k;
    };
    return std::pair{height(v0) - multiplicity(am), height(v0) + multiplicity(an)};
  }

  /// N |zeta_u(v')| = |zeta_g(v')| at a vertex v' fixed by u, given u^N = g.
  bool root_bound_check(const BSWord& x, const BSWord& u, std::int64_t n_root, std::size_t radius) const {
    if (n_root <= 0) throw std::invalid_argument("root order must be positive");
    if (!(power(g_, u, n_root) == x)) throw std::invalid_argument("u^N differs from g");
    auto fixed = fixed_subtree(u, radius);
    if (fixed.vertices.empty()) throw std::runtime_error("no common fixed vertex within the radius");
    const TreeVertex& v = fixed.vertices.front();
    return n_root * std::llabs(zeta(u, v)) == std::llabs(zeta(x, v));
  }

  /// Smallest k in [1, bound] with x^{-1} a^k x in <a>.
  std::optional<std::int64_t> intersection_index_witness(const BSWord& x, std::int64_t bound) const {
    if (bound < 1) throw std::invalid_argument("bound must be positive");
    BSWord xi = g_.inv(x);
    for (std::int64_t k = 1; k <= bound; ++k) {
      if (g_.mul(xi, g_.mul(g_.a(k), x)).is_power_of_a()) return k;
    }
    return std::nullopt;
  }

  /// Representative built from a^{[0,m)} and t^{-1} letters only: the
  /// complete |m|-ary subtree below the root.
  bool in_negative_subtree(const TreeVertex& v) const {
    for (auto s : v.signs) {
      if (s != -1) return false;
    }
    return true;
  }

 private:
  TreeVertex step(const TreeVertex& v, std::int64_t k, int sign) const {
    BSWord w = v;
    g_.append_a(w, k);
    g_.append_t(w, sign);
    return vertex(std::move(w));
  }

  BaumslagSolitarGroup g_;
};

}  // namespace srs

#endif  // SRSLAB_BASS_SERRE_HPP
