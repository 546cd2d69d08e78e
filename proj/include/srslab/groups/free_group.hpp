#ifndef SRSLAB_GROUPS_FREE_GROUP_HPP
#define SRSLAB_GROUPS_FREE_GROUP_HPP

#include <cctype>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "srslab/group.hpp"

namespace srs {

/// Freely reduced word. Letter +i is the i-th generator (1-based), -i its inverse.
struct FreeWord {
  std::vector<std::int32_t> letters;
  friend bool operator==(const FreeWord&, const FreeWord&) = default;
  friend auto operator<=>(const FreeWord&, const FreeWord&) = default;
};

/// Free group of rank k. Letters print as x1..xk, inverses as X1..Xk.
class FreeGroup {
 public:
  using element_type = FreeWord;

  explicit FreeGroup(int rank) : rank_(rank) {
    if (rank < 1) throw std::invalid_argument("free group rank must be positive");
  }
  int rank() const { return rank_; }

  element_type identity() const { return {}; }

  element_type mul(const element_type& x, const element_type& y) const {
    FreeWord r = x;
    for (auto l : y.letters) push(r, l);
    return r;
  }
  element_type inv(const element_type& x) const {
    FreeWord r;
    r.letters.reserve(x.letters.size());
    for (auto it = x.letters.rbegin(); it != x.letters.rend(); ++it) r.letters.push_back(-*it);
    return r;
  }
  element_type letter(std::int32_t l) const {
    if (l == 0 || l > rank_ || -l > rank_) throw std::invalid_argument("letter out of range");
    return FreeWord{{l}};
  }
  std::vector<element_type> generators() const {
    std::vector<element_type> g;
    for (int i = 1; i <= rank_; ++i) {
      g.push_back(letter(i));
      g.push_back(letter(-i));
    }
    return g;
  }

  std::string format(const element_type& x) const {
    if (x.letters.empty()) return "e";
    std::string s;
    for (auto l : x.letters) s += (l > 0 ? "x" : "X") + std::to_string(l > 0 ? l : -l);
    return s;
  }
  element_type parse(std::string_view text) const {
    FreeWord r;
    if (text == "e") return r;
    std::size_t i = 0;
    while (i < text.size()) {
      char c = text[i++];
      if (c != 'x' && c != 'X') throw std::invalid_argument("malformed free word");
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j == i) throw std::invalid_argument("malformed free word");
      auto idx = static_cast<std::int32_t>(std::stol(std::string(text.substr(i, j - i))));
      push(r, letter(c == 'x' ? idx : -idx).letters[0]);
      i = j;
    }
    return r;
  }
  std::string name() const { return "F_" + std::to_string(rank_); }

 private:
  static void push(FreeWord& w, std::int32_t l) {
    if (!w.letters.empty() && w.letters.back() == -l) {
      w.letters.pop_back();
    } else {
      w.letters.push_back(l);
    }
  }
  int rank_;
};

}  // namespace srs

template <>
struct std::hash<srs::FreeWord> {
  std::size_t operator()(const srs::FreeWord& w) const {
    std::size_t h = w.letters.size();
    for (auto l : w.letters) h = srs::hash_combine(h, std::hash<std::int32_t>{}(l));
    return h;
  }
};

#endif  // SRSLAB_GROUPS_FREE_GROUP_HPP
