#ifndef SRSLAB_GROUPS_INTEGERS_HPP
#define SRSLAB_GROUPS_INTEGERS_HPP

#include <algorithm>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "srslab/group.hpp"

namespace srs {

namespace detail {

inline std::int64_t parse_int64(std::string_view text) {
  std::size_t used = 0;
  std::string s(text);
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed integer: " + s);
  }
  if (used != s.size()) throw std::invalid_argument("malformed integer: " + s);
  return v;
}

inline std::int64_t checked_add(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_add_overflow(x, y, &r)) throw std::overflow_error("int64 overflow");
  return r;
}

inline std::int64_t checked_mul(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_mul_overflow(x, y, &r)) throw std::overflow_error("int64 overflow");
  return r;
}

}  // namespace detail

/// The infinite cyclic group, written additively.
class IntegerGroup {
 public:
  using element_type = std::int64_t;

  element_type identity() const { return 0; }
  element_type mul(element_type x, element_type y) const {
    return detail::checked_add(x, y);
  }
  element_type inv(element_type x) const { return -x; }
  std::vector<element_type> generators() const { return {1, -1}; }
  std::string format(element_type x) const { return std::to_string(x); }
  element_type parse(std::string_view text) const { return detail::parse_int64(text); }
  std::string name() const { return "Z"; }
};

/// Integer vector; the element type of Z^d.
struct IntVec {
  std::vector<std::int64_t> c;

  std::size_t size() const { return c.size(); }
  std::int64_t operator[](std::size_t i) const { return c[i]; }
  std::int64_t& operator[](std::size_t i) { return c[i]; }

  friend bool operator==(const IntVec&, const IntVec&) = default;
  friend auto operator<=>(const IntVec&, const IntVec&) = default;

  /// Sup norm.
  std::int64_t norm_inf() const {
    std::int64_t r = 0;
    for (auto v : c) r = std::max(r, std::abs(v));
    return r;
  }
};

/// Z^d with the standard basis as generators, ordered e_1, -e_1, e_2, -e_2, ...
class LatticeGroup {
 public:
  using element_type = IntVec;

  explicit LatticeGroup(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("lattice dimension must be positive");
  }

  std::size_t dim() const { return dim_; }

  element_type identity() const { return IntVec{std::vector<std::int64_t>(dim_, 0)}; }

  element_type mul(const element_type& x, const element_type& y) const {
    check(x);
    check(y);
    IntVec r = x;
    for (std::size_t i = 0; i < dim_; ++i) r[i] = detail::checked_add(r[i], y[i]);
    return r;
  }
  element_type inv(const element_type& x) const {
    check(x);
    IntVec r = x;
    for (auto& v : r.c) v = -v;
    return r;
  }
  element_type basis(std::size_t i, std::int64_t sign = 1) const {
    IntVec r = identity();
    r[i] = sign;
    return r;
  }
  std::vector<element_type> generators() const {
    std::vector<element_type> g;
    for (std::size_t i = 0; i < dim_; ++i) {
      g.push_back(basis(i, 1));
      g.push_back(basis(i, -1));
    }
    return g;
  }

  /// "(x,y,z)".
  std::string format(const element_type& x) const {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(x[i]);
    }
    return s + ")";
  }
  element_type parse(std::string_view text) const {
    if (text.size() < 2 || text.front() != '(' || text.back() != ')') {
      throw std::invalid_argument("malformed lattice vector: " + std::string(text));
    }
    text = text.substr(1, text.size() - 2);
    IntVec r;
    while (true) {
      auto comma = text.find(',');
      r.c.push_back(detail::parse_int64(text.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      text = text.substr(comma + 1);
    }
    check(r);
    return r;
  }
  std::string name() const { return "Z^" + std::to_string(dim_); }

  /// All vectors with sup norm <= r, in lexicographic order.
  std::vector<element_type> box(std::int64_t r) const {
    std::vector<element_type> out;
    IntVec v{std::vector<std::int64_t>(dim_, -r)};
    while (true) {
      out.push_back(v);
      std::size_t i = dim_;
      while (i > 0) {
        --i;
        if (v[i] < r) {
          ++v[i];
          for (std::size_t j = i + 1; j < dim_; ++j) v[j] = -r;
          break;
        }
        if (i == 0) return out;
      }
    }
  }

 private:
  void check(const element_type& x) const {
    if (x.size() != dim_) throw group_mismatch("lattice dimension mismatch");
  }
  std::size_t dim_;
};

/// Z/q, residues in [0, q).
class CyclicGroup {
 public:
  using element_type = std::int64_t;

  explicit CyclicGroup(std::int64_t order) : q_(order) {
    if (order < 1) throw std::invalid_argument("cyclic order must be positive");
  }
  std::int64_t order() const { return q_; }

  element_type identity() const { return 0; }
  element_type mul(element_type x, element_type y) const { return reduce(x + y); }
  element_type inv(element_type x) const { return reduce(-x); }
  std::vector<element_type> generators() const {
    if (q_ == 1) return {};
    if (q_ == 2) return {1};
    return {1, q_ - 1};
  }
  std::string format(element_type x) const { return std::to_string(x); }
  element_type parse(std::string_view text) const {
    auto v = detail::parse_int64(text);
    if (v < 0 || v >= q_) throw std::invalid_argument("residue out of range");
    return v;
  }
  std::string name() const { return "Z/" + std::to_string(q_); }

  /// All elements; used for membership tests in finite base groups.
  std::vector<element_type> elements() const {
    std::vector<element_type> out(static_cast<std::size_t>(q_));
    std::iota(out.begin(), out.end(), 0);
    return out;
  }

 private:
  element_type reduce(element_type x) const {
    x %= q_;
    return x < 0 ? x + q_ : x;
  }
  std::int64_t q_;
};

}  // namespace srs

template <>
struct std::hash<srs::IntVec> {
  std::size_t operator()(const srs::IntVec& v) const {
    std::size_t h = v.c.size();
    for (auto x : v.c) h = srs::hash_combine(h, std::hash<std::int64_t>{}(x));
    return h;
  }
};

#endif  // SRSLAB_GROUPS_INTEGERS_HPP
