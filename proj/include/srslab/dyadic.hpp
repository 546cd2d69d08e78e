#ifndef SRSLAB_DYADIC_HPP
#define SRSLAB_DYADIC_HPP

#include <gmpxx.h>

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace srs {

/// Exact element of Z[1/2]: numerator / 2^exponent.
///
/// The representation is kept canonical (numerator odd, or exponent zero), so
/// structural equality is value equality and hashing is well defined.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(long value) : num_(value) {}  // NOLINT(google-explicit-constructor)
  explicit Dyadic(mpz_class numerator, std::int64_t exponent = 0)
      : num_(std::move(numerator)), exp_(exponent) {
    if (exp_ < 0) {
      mpz_mul_2exp(num_.get_mpz_t(), num_.get_mpz_t(),
                   static_cast<mp_bitcnt_t>(-exp_));
      exp_ = 0;
    }
    normalize();
  }

  static Dyadic pow2(std::int64_t k) {
    if (k >= 0) {
      mpz_class n;
      mpz_ui_pow_ui(n.get_mpz_t(), 2, static_cast<unsigned long>(k));
      return Dyadic(std::move(n));
    }
    return Dyadic(mpz_class(1), -k);
  }

  const mpz_class& numerator() const { return num_; }
  std::int64_t exponent() const { return exp_; }

  bool is_zero() const { return sgn(num_) == 0; }
  bool is_integer() const { return exp_ == 0; }
  int sign() const { return sgn(num_); }

  /// Multiplication by 2^k for any integer k.
  Dyadic scaled(std::int64_t k) const {
    Dyadic r = *this;
    r.scale_inplace(k);
    return r;
  }

  void scale_inplace(std::int64_t k) {
    if (is_zero()) return;
    if (k < 0) {
      exp_ -= k;
      normalize();
      return;
    }
    auto ku = static_cast<std::uint64_t>(k);
    auto e = static_cast<std::uint64_t>(exp_);
    if (ku <= e) {
      exp_ -= k;
    } else {
      mpz_mul_2exp(num_.get_mpz_t(), num_.get_mpz_t(), ku - e);
      exp_ = 0;
    }
  }

  mpz_class floor() const {
    mpz_class r;
    mpz_fdiv_q_2exp(r.get_mpz_t(), num_.get_mpz_t(),
                    static_cast<mp_bitcnt_t>(exp_));
    return r;
  }

  mpz_class ceil() const {
    mpz_class r;
    mpz_cdiv_q_2exp(r.get_mpz_t(), num_.get_mpz_t(),
                    static_cast<mp_bitcnt_t>(exp_));
    return r;
  }

  double to_double() const {
    long e = 0;
    double m = mpz_get_d_2exp(&e, num_.get_mpz_t());
    return std::ldexp(m, static_cast<int>(e - exp_));
  }

  mpq_class to_rational() const {
    mpq_class q(num_, mpz_class(1) << static_cast<mp_bitcnt_t>(exp_));
    q.canonicalize();
    return q;
  }

  friend Dyadic operator+(const Dyadic& x, const Dyadic& y) {
    Dyadic r;
    add_aligned(r, x, y, false);
    return r;
  }
  friend Dyadic operator-(const Dyadic& x, const Dyadic& y) {
    Dyadic r;
    add_aligned(r, x, y, true);
    return r;
  }
  friend Dyadic operator-(const Dyadic& x) {
    Dyadic r = x;
    r.num_ = -r.num_;
    return r;
  }
  friend Dyadic operator*(const Dyadic& x, const Dyadic& y) {
    Dyadic r;
    r.num_ = x.num_ * y.num_;
    r.exp_ = x.exp_ + y.exp_;
    r.normalize();
    return r;
  }
  Dyadic& operator+=(const Dyadic& y) { return *this = *this + y; }
  Dyadic& operator-=(const Dyadic& y) { return *this = *this - y; }

  friend bool operator==(const Dyadic& x, const Dyadic& y) {
    return x.exp_ == y.exp_ && x.num_ == y.num_;
  }
  friend std::strong_ordering operator<=>(const Dyadic& x, const Dyadic& y) {
    int c;
    if (x.exp_ == y.exp_) {
      c = cmp(x.num_, y.num_);
    } else if (x.exp_ < y.exp_) {
      c = cmp_shifted(x.num_, static_cast<mp_bitcnt_t>(y.exp_ - x.exp_), y.num_);
    } else {
      c = -cmp_shifted(y.num_, static_cast<mp_bitcnt_t>(x.exp_ - y.exp_), x.num_);
    }
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater
                          : std::strong_ordering::equal);
  }

  /// Serialized as "num/2^e"; parse() also accepts a bare integer.
  std::string str() const {
    return num_.get_str() + "/2^" + std::to_string(exp_);
  }

  static Dyadic parse(std::string_view text) {
    auto slash = text.find('/');
    try {
      if (slash == std::string_view::npos) {
        return Dyadic(mpz_class(std::string(text)));
      }
      auto den = text.substr(slash + 1);
      if (den.size() < 3 || den.substr(0, 2) != "2^") {
        throw std::invalid_argument("denominator must be 2^e");
      }
      auto e = std::stoll(std::string(den.substr(2)));
      if (e < 0) throw std::invalid_argument("negative exponent");
      return Dyadic(mpz_class(std::string(text.substr(0, slash))), e);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("malformed dyadic: " + std::string(text));
    }
  }

  std::size_t hash() const {
    std::size_t h = std::hash<std::int64_t>{}(exp_);
    const auto* limbs = mpz_limbs_read(num_.get_mpz_t());
    std::size_t n = mpz_size(num_.get_mpz_t());
    for (std::size_t i = 0; i < n; ++i) {
      h ^= std::hash<mp_limb_t>{}(limbs[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h ^ static_cast<std::size_t>(sgn(num_) + 1);
  }

  friend std::ostream& operator<<(std::ostream& os, const Dyadic& d) {
    return os << d.str();
  }

 private:
  static void add_aligned(Dyadic& r, const Dyadic& x, const Dyadic& y, bool subtract) {
    if (x.exp_ == y.exp_) {
      r.exp_ = x.exp_;
      if (subtract) {
        mpz_sub(r.num_.get_mpz_t(), x.num_.get_mpz_t(), y.num_.get_mpz_t());
      } else {
        mpz_add(r.num_.get_mpz_t(), x.num_.get_mpz_t(), y.num_.get_mpz_t());
      }
    } else if (x.exp_ < y.exp_) {
      r.exp_ = y.exp_;
      mpz_mul_2exp(r.num_.get_mpz_t(), x.num_.get_mpz_t(),
                   static_cast<mp_bitcnt_t>(y.exp_ - x.exp_));
      if (subtract) {
        mpz_sub(r.num_.get_mpz_t(), r.num_.get_mpz_t(), y.num_.get_mpz_t());
      } else {
        mpz_add(r.num_.get_mpz_t(), r.num_.get_mpz_t(), y.num_.get_mpz_t());
      }
    } else {
      r.exp_ = x.exp_;
      mpz_mul_2exp(r.num_.get_mpz_t(), y.num_.get_mpz_t(),
                   static_cast<mp_bitcnt_t>(x.exp_ - y.exp_));
      if (subtract) {
        mpz_sub(r.num_.get_mpz_t(), x.num_.get_mpz_t(), r.num_.get_mpz_t());
      } else {
        mpz_add(r.num_.get_mpz_t(), x.num_.get_mpz_t(), r.num_.get_mpz_t());
      }
    }
    r.normalize();
  }

  void normalize() {
    if (sgn(num_) == 0) {
      exp_ = 0;
      return;
    }
    if (exp_ == 0) return;
    auto tz = static_cast<std::int64_t>(mpz_scan1(num_.get_mpz_t(), 0));
    auto shift = tz < exp_ ? tz : exp_;
    if (shift > 0) {
      mpz_fdiv_q_2exp(num_.get_mpz_t(), num_.get_mpz_t(),
                      static_cast<mp_bitcnt_t>(shift));
      exp_ -= shift;
    }
  }

  /// Sign of a * 2^s - b. Signs and bit lengths settle most comparisons
  /// without materializing the shift.
  static int cmp_shifted(const mpz_class& a, mp_bitcnt_t s, const mpz_class& b) {
    int sa = sgn(a), sb = sgn(b);
    if (sa != sb) return sa < sb ? -1 : 1;
    if (sa == 0) return 0;
    std::size_t la = mpz_sizeinbase(a.get_mpz_t(), 2) + s;
    std::size_t lb = mpz_sizeinbase(b.get_mpz_t(), 2);
    if (la != lb) return (la < lb) == (sa > 0) ? -1 : 1;
    thread_local mpz_class shifted;
    mpz_mul_2exp(shifted.get_mpz_t(), a.get_mpz_t(), s);
    return cmp(shifted, b);
  }

  mpz_class num_{0};
  std::int64_t exp_ = 0;
};

}  // namespace srs

template <>
struct std::hash<srs::Dyadic> {
  std::size_t operator()(const srs::Dyadic& d) const { return d.hash(); }
};

#endif  // SRSLAB_DYADIC_HPP
