#ifndef SRSLAB_GROUPS_SYMMETRIC_HPP
#define SRSLAB_GROUPS_SYMMETRIC_HPP

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "srslab/group.hpp"

namespace srs {

/// Permutation of {0..s-1} stored as its image list. Printed 1-based in cycle
/// notation.
struct Perm {
  std::vector<std::uint8_t> img;
  friend bool operator==(const Perm&, const Perm&) = default;
  friend auto operator<=>(const Perm&, const Perm&) = default;
};

/// Symmetric group S_s. Product is composition: (xy)(i) = x(y(i)).
class SymmetricGroup {
 public:
  using element_type = Perm;

  explicit SymmetricGroup(int degree) : s_(degree) {
    if (degree < 1 || degree > 255) throw std::invalid_argument("degree must be in [1,255]");
  }
  int degree() const { return s_; }

  element_type identity() const {
    Perm p;
    p.img.resize(static_cast<std::size_t>(s_));
    std::iota(p.img.begin(), p.img.end(), std::uint8_t{0});
    return p;
  }
  element_type mul(const element_type& x, const element_type& y) const {
    check(x);
    check(y);
    Perm r;
    r.img.resize(x.img.size());
    for (std::size_t i = 0; i < r.img.size(); ++i) r.img[i] = x.img[y.img[i]];
    return r;
  }
  element_type inv(const element_type& x) const {
    check(x);
    Perm r;
    r.img.resize(x.img.size());
    for (std::size_t i = 0; i < r.img.size(); ++i) r.img[x.img[i]] = static_cast<std::uint8_t>(i);
    return r;
  }
  /// Transposition of the 1-based points i and j.
  element_type transposition(int i, int j) const {
    Perm p = identity();
    std::swap(p.img[static_cast<std::size_t>(i - 1)], p.img[static_cast<std::size_t>(j - 1)]);
    return p;
  }
  /// Adjacent transpositions (12), (23), ...
  std::vector<element_type> generators() const {
    std::vector<element_type> g;
    for (int i = 1; i < s_; ++i) g.push_back(transposition(i, i + 1));
    return g;
  }

  std::vector<element_type> elements() const {
    std::vector<element_type> out;
    Perm p = identity();
    do {
      out.push_back(p);
    } while (std::next_permutation(p.img.begin(), p.img.end()));
    return out;
  }

  /// Cycle notation, e.g. "(12)(345)" or "e". Points are separated by commas
  /// when the degree exceeds 9.
  std::string format(const element_type& x) const {
    check(x);
    std::string s;
    std::vector<bool> seen(x.img.size(), false);
    for (std::size_t i = 0; i < x.img.size(); ++i) {
      if (seen[i] || x.img[i] == i) continue;
      s += '(';
      std::size_t j = i;
      bool first = true;
      while (!seen[j]) {
        seen[j] = true;
        if (!first && s_ > 9) s += ',';
        s += std::to_string(j + 1);
        first = false;
        j = x.img[j];
      }
      s += ')';
    }
    return s.empty() ? "e" : s;
  }

  element_type parse(std::string_view text) const {
    Perm r = identity();
    if (text == "e") return r;
    std::size_t i = 0;
    while (i < text.size()) {
      if (text[i] != '(') throw std::invalid_argument("malformed permutation");
      auto close = text.find(')', i);
      if (close == std::string_view::npos) throw std::invalid_argument("malformed permutation");
      auto body = text.substr(i + 1, close - i - 1);
      std::vector<int> pts;
      if (body.find(',') != std::string_view::npos) {
        std::size_t k = 0;
        while (k <= body.size()) {
          auto c = body.find(',', k);
          auto tok = body.substr(k, c == std::string_view::npos ? body.size() - k : c - k);
          pts.push_back(std::stoi(std::string(tok)));
          if (c == std::string_view::npos) break;
          k = c + 1;
        }
      } else {
        for (char c : body) {
          if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw std::invalid_argument("malformed permutation");
          }
          pts.push_back(c - '0');
        }
      }
      Perm cyc = identity();
      for (std::size_t k = 0; k < pts.size(); ++k) {
        int from = pts[k];
        int to = pts[(k + 1) % pts.size()];
        if (from < 1 || from > s_ || to < 1 || to > s_) {
          throw std::invalid_argument("point out of range");
        }
        cyc.img[static_cast<std::size_t>(from - 1)] = static_cast<std::uint8_t>(to - 1);
      }
      // Cycles are applied right to left, matching mul().
      r = mul(r, cyc);
      i = close + 1;
    }
    return r;
  }
  std::string name() const { return "S_" + std::to_string(s_); }

 private:
  void check(const element_type& x) const {
    if (x.img.size() != static_cast<std::size_t>(s_)) throw group_mismatch("degree mismatch");
  }
  int s_;
};

}  // namespace srs

template <>
struct std::hash<srs::Perm> {
  std::size_t operator()(const srs::Perm& p) const {
    std::size_t h = p.img.size();
    for (auto v : p.img) h = srs::hash_combine(h, v);
    return h;
  }
};

#endif  // SRSLAB_GROUPS_SYMMETRIC_HPP
