#ifndef SRSLAB_GROUPS_BAUMSLAG_SOLITAR_HPP
#define SRSLAB_GROUPS_BAUMSLAG_SOLITAR_HPP

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "srslab/group.hpp"
#include "srslab/groups/integers.hpp"

namespace srs {

/// Britton normal form a^{k_0} t^{e_1} a^{k_1} ... t^{e_r} a^{k_r}.
/// exps has r+1 entries, signs has r entries in {+1, -1}.
struct BSWord {
  std::vector<std::int64_t> exps{0};
  std::vector<std::int8_t> signs;

  std::size_t t_length() const { return signs.size(); }
  std::int64_t height() const {
    std::int64_t h = 0;
    for (auto s : signs) h += s;
    return h;
  }
  bool is_power_of_a() const { return signs.empty(); }

  friend bool operator==(const BSWord&, const BSWord&) = default;
  friend auto operator<=>(const BSWord&, const BSWord&) = default;
};

namespace detail {

/// Floor division with nonnegative remainder modulo |d|.
inline void floor_divmod(std::int64_t k, std::int64_t d, std::int64_t& q, std::int64_t& s) {
  std::int64_t ad = d < 0 ? -d : d;
  s = k % ad;
  if (s < 0) s += ad;
  q = (k - s) / d;
}

}  // namespace detail

/// BS(m, n) = <a, t | t a^m t^{-1} = a^n>.
///
/// Normal form: the exponent in front of t is reduced mod |n| (using
/// a^n t = t a^m) and the exponent in front of t^{-1} mod |m| (using
/// a^m t^{-1} = t^{-1} a^n). Pinches t a^{jm} t^{-1} and t^{-1} a^{jn} t are
/// removed. Exponents are int64; overflow throws std::overflow_error.
class BaumslagSolitarGroup {
 public:
  using element_type = BSWord;

  BaumslagSolitarGroup(std::int64_t m, std::int64_t n) : m_(m), n_(n) {
    if (m == 0 || n == 0) throw std::invalid_argument("BS parameters must be nonzero");
  }
  std::int64_t m() const { return m_; }
  std::int64_t n() const { return n_; }

  element_type identity() const { return {}; }
  element_type a(std::int64_t k = 1) const { return BSWord{{k}, {}}; }
  element_type t(int sign = 1) const {
    BSWord w;
    append_t(w, sign);
    return w;
  }

  /// In-place right multiplication by a^k.
  void append_a(BSWord& w, std::int64_t k) const {
    w.exps.back() = detail::checked_add(w.exps.back(), k);
  }

  /// In-place right multiplication by t^{sign}.
  void append_t(BSWord& w, int sign) const {
    std::int64_t k = w.exps.back();
    if (!w.signs.empty() && w.signs.back() == -sign) {
      if (sign == -1 && k % m_ == 0) {
        // t a^{jm} t^{-1} = a^{jn}
        w.signs.pop_back();
        w.exps.pop_back();
        append_a(w, detail::checked_mul(k / m_, n_));
        return;
      }
      if (sign == 1 && k % n_ == 0) {
        // t^{-1} a^{jn} t = a^{jm}
        w.signs.pop_back();
        w.exps.pop_back();
        append_a(w, detail::checked_mul(k / n_, m_));
        return;
      }
    }
    std::int64_t q, s;
    if (sign == 1) {
      detail::floor_divmod(k, n_, q, s);
      w.exps.back() = s;
      w.signs.push_back(1);
      w.exps.push_back(detail::checked_mul(q, m_));
    } else {
      detail::floor_divmod(k, m_, q, s);
      w.exps.back() = s;
      w.signs.push_back(-1);
      w.exps.push_back(detail::checked_mul(q, n_));
    }
  }

  /// w <- w * g.
  void right_multiply(BSWord& w, const BSWord& g) const {
    append_a(w, g.exps[0]);
    for (std::size_t i = 0; i < g.signs.size(); ++i) {
      append_t(w, g.signs[i]);
      append_a(w, g.exps[i + 1]);
    }
  }

  element_type mul(const element_type& x, const element_type& y) const {
    BSWord r = x;
    right_multiply(r, y);
    return r;
  }

  element_type inv(const element_type& x) const {
    BSWord r;
    std::size_t r_len = x.signs.size();
    append_a(r, -x.exps[r_len]);
    for (std::size_t i = r_len; i-- > 0;) {
      append_t(r, -x.signs[i]);
      append_a(r, -x.exps[i]);
    }
    return r;
  }

  /// Reduces an arbitrary syllable sequence a^{k_0} t^{e_1} a^{k_1} ...
  element_type reduce(const std::vector<std::int64_t>& exps,
                      const std::vector<int>& signs) const {
    if (exps.size() != signs.size() + 1) throw std::invalid_argument("syllable count mismatch");
    BSWord r;
    append_a(r, exps[0]);
    for (std::size_t i = 0; i < signs.size(); ++i) {
      if (signs[i] != 1 && signs[i] != -1) throw std::invalid_argument("t exponent must be +-1");
      append_t(r, signs[i]);
      append_a(r, exps[i + 1]);
    }
    return r;
  }

  /// a, a^{-1}, t, t^{-1}.
  std::vector<element_type> generators() const { return {a(1), a(-1), t(1), t(-1)}; }

  /// Letters a, A (= a^{-1}), t, T (= t^{-1}); a run of a's is written with a
  /// count, e.g. "a3TA2t". The identity is "e".
  std::string format(const element_type& w) const {
    std::string s;
    auto emit_a = [&s](std::int64_t k) {
      if (k == 0) return;
      s += k > 0 ? 'a' : 'A';
      std::int64_t ak = k > 0 ? k : -k;
      if (ak != 1) s += std::to_string(ak);
    };
    emit_a(w.exps[0]);
    for (std::size_t i = 0; i < w.signs.size(); ++i) {
      s += w.signs[i] > 0 ? 't' : 'T';
      emit_a(w.exps[i + 1]);
    }
    return s.empty() ? "e" : s;
  }

  element_type parse(std::string_view text) const {
    BSWord r;
    if (text == "e") return r;
    std::size_t i = 0;
    while (i < text.size()) {
      char c = text[i++];
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      std::int64_t count = j > i ? detail::parse_int64(text.substr(i, j - i)) : 1;
      i = j;
      switch (c) {
        case 'a': append_a(r, count); break;
        case 'A': append_a(r, -count); break;
        case 't':
        case 'T':
          for (std::int64_t k = 0; k < count; ++k) append_t(r, c == 't' ? 1 : -1);
          break;
        default: throw std::invalid_argument("malformed BS word: " + std::string(text));
      }
    }
    return r;
  }

  std::string name() const {
    return "BS(" + std::to_string(m_) + "," + std::to_string(n_) + ")";
  }

 private:
  std::int64_t m_, n_;
};

}  // namespace srs

template <>
struct std::hash<srs::BSWord> {
  std::size_t operator()(const srs::BSWord& w) const {
    std::size_t h = w.signs.size();
    for (auto e : w.exps) h = srs::hash_combine(h, std::hash<std::int64_t>{}(e));
    for (auto s : w.signs) h = srs::hash_combine(h, static_cast<std::size_t>(s + 1));
    return h;
  }
};

#endif  // SRSLAB_GROUPS_BAUMSLAG_SOLITAR_HPP
