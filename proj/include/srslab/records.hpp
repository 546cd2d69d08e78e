#ifndef SRSLAB_RECORDS_HPP
#define SRSLAB_RECORDS_HPP

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "srslab/random.hpp"

namespace srs {

enum class TailClass { polynomial_decay, geometric, explicit_finite, custom };

/// Probability distribution p on N together with its tail sums
/// tail(j) = sum_{i >= j} p_i.
///
/// Kinds:
///   telescoping      p_j = 1/((j+1)(j+2)), tail(j) = 1/(j+1)
///   zeta(s)          p_j proportional to (j+1)^{-s}, s > 1
///   geometric(r)     p_j = (1-r) r^j, r rational in (0,1)
///   explicit_finite  listed rational masses, zero beyond
///   custom           mass function supplied by the caller
class TailDistribution {
 public:
  enum class Kind { telescoping, zeta, geometric, explicit_finite, custom };

  static TailDistribution telescoping() {
    TailDistribution p;
    p.kind_ = Kind::telescoping;
    p.class_ = TailClass::polynomial_decay;
    p.decay_exponent_ = 2;
    return p;
  }

  static TailDistribution zeta(double s) {
    if (!(s > 1)) throw std::invalid_argument("zeta exponent must exceed 1");
    TailDistribution p;
    p.kind_ = Kind::zeta;
    p.class_ = TailClass::polynomial_decay;
    p.decay_exponent_ = s;
    p.zeta_total_ = hurwitz(static_cast<long double>(s), 1);
    return p;
  }

  static TailDistribution geometric(const mpq_class& ratio) {
    if (ratio <= 0 || ratio >= 1) throw std::invalid_argument("ratio must lie in (0,1)");
    TailDistribution p;
    p.kind_ = Kind::geometric;
    p.class_ = TailClass::geometric;
    p.ratio_ = ratio;
    p.ratio_ld_ = static_cast<long double>(ratio.get_d());
    return p;
  }

  static TailDistribution explicit_finite(std::vector<mpq_class> masses) {
    if (masses.empty()) throw std::invalid_argument("empty mass list");
    mpq_class total = 0;
    for (const auto& m : masses) {
      if (m < 0) throw std::invalid_argument("negative mass");
      total += m;
    }
    if (total != 1) throw std::invalid_argument("masses must sum to 1");
    while (masses.size() > 1 && masses.back() == 0) masses.pop_back();
    TailDistribution p;
    p.kind_ = Kind::explicit_finite;
    p.class_ = TailClass::explicit_finite;
    p.finite_ = std::move(masses);
    p.finite_tail_.assign(p.finite_.size() + 1, 0);
    for (std::size_t j = p.finite_.size(); j-- > 0;) {
      p.finite_tail_[j] = p.finite_tail_[j + 1] + p.finite_[j];
    }
    return p;
  }

  /// The masses must be nonnegative and sum to 1; tails are computed as
  /// 1 - partial sums in long double.
  static TailDistribution custom(std::function<long double(std::uint64_t)> mass,
                                 std::string label) {
    TailDistribution p;
    p.kind_ = Kind::custom;
    p.class_ = TailClass::custom;
    p.custom_ = std::make_shared<CustomState>();
    p.custom_->mass = std::move(mass);
    p.custom_->label = std::move(label);
    p.custom_->prefix.push_back(0);
    return p;
  }

  Kind kind() const { return kind_; }
  TailClass tail_class() const { return class_; }
  double decay_exponent() const { return decay_exponent_; }
  const mpq_class& ratio() const { return ratio_; }
  const std::vector<mpq_class>& finite_masses() const { return finite_; }
  bool support_infinite() const { return kind_ != Kind::explicit_finite; }

  /// Largest index with positive mass, or nullopt for infinite support.
  std::optional<std::uint64_t> support_max() const {
    if (kind_ != Kind::explicit_finite) return std::nullopt;
    return finite_.size() - 1;
  }

  std::string label() const {
    std::ostringstream os;
    switch (kind_) {
      case Kind::telescoping: os << "telescoping"; break;
      case Kind::zeta: os << "zeta(" << decay_exponent_ << ")"; break;
      case Kind::geometric: os << "geometric(" << ratio_.get_str() << ")"; break;
      case Kind::explicit_finite: os << "explicit_finite(" << finite_.size() << ")"; break;
      case Kind::custom: os << "custom(" << custom_->label << ")"; break;
    }
    return os.str();
  }

  /// Exact p_j where the kind allows it.
  std::optional<mpq_class> exact_mass(std::uint64_t j) const {
    switch (kind_) {
      case Kind::telescoping: {
        mpz_class a = mpz_class(static_cast<unsigned long>(j)) + 1;
        return mpq_class(mpz_class(1), a * (a + 1));
      }
      case Kind::geometric: return (1 - ratio_) * pow_q(ratio_, j);
      case Kind::explicit_finite: return j < finite_.size() ? finite_[j] : mpq_class(0);
      default: return std::nullopt;
    }
  }

  /// Exact tail(j) where the kind allows it.
  std::optional<mpq_class> exact_tail(std::uint64_t j) const {
    switch (kind_) {
      case Kind::telescoping:
        return mpq_class(mpz_class(1), mpz_class(static_cast<unsigned long>(j)) + 1);
      case Kind::geometric: return pow_q(ratio_, j);
      case Kind::explicit_finite:
        return j < finite_tail_.size() ? finite_tail_[j] : mpq_class(0);
      default: return std::nullopt;
    }
  }

  long double mass(std::uint64_t j) const {
    switch (kind_) {
      case Kind::telescoping: {
        long double a = static_cast<long double>(j) + 1;
        return 1.0L / (a * (a + 1));
      }
      case Kind::zeta:
        return std::pow(static_cast<long double>(j) + 1, -static_cast<long double>(decay_exponent_)) /
               zeta_total_;
      case Kind::geometric:
        return (1 - ratio_ld_) * std::pow(ratio_ld_, static_cast<long double>(j));
      case Kind::explicit_finite:
        return j < finite_.size() ? static_cast<long double>(finite_[j].get_d()) : 0.0L;
      case Kind::custom: return custom_->mass(j);
    }
    return 0;
  }

  long double tail(std::uint64_t j) const {
    switch (kind_) {
      case Kind::telescoping: return 1.0L / (static_cast<long double>(j) + 1);
      case Kind::zeta:
        if (j == 0) return 1.0L;
        return hurwitz(static_cast<long double>(decay_exponent_), static_cast<long double>(j) + 1) /
               zeta_total_;
      case Kind::geometric: return std::pow(ratio_ld_, static_cast<long double>(j));
      case Kind::explicit_finite:
        return j < finite_tail_.size() ? static_cast<long double>(finite_tail_[j].get_d()) : 0.0L;
      case Kind::custom: {
        auto& pre = custom_->prefix;
        while (pre.size() <= j) pre.push_back(pre.back() + custom_->mass(pre.size() - 1));
        return std::max(0.0L, 1.0L - pre[j]);
      }
    }
    return 0;
  }

  /// X = max{ j : tail(j) >= U } with U uniform on (0,1]; X has law p.
  std::uint64_t sample(Rng& rng) const {
    long double u = rng.uniform_open_closed();
    switch (kind_) {
      case Kind::telescoping: {
        // tail(j) = 1/(j+1) >= u  <=>  j <= 1/u - 1.
        long double x = std::floor(1.0L / u) - 1;
        return static_cast<std::uint64_t>(x);
      }
      case Kind::geometric: {
        long double x = std::floor(std::log(u) / std::log(ratio_ld_));
        std::uint64_t j = static_cast<std::uint64_t>(std::max(0.0L, x));
        // Guard against rounding at the boundary.
        while (j > 0 && tail(j) < u) --j;
        while (tail(j + 1) >= u) ++j;
        return j;
      }
      case Kind::explicit_finite: {
        std::uint64_t j = 0;
        while (j + 1 < finite_tail_.size() && tail(j + 1) >= u) ++j;
        return j;
      }
      default: {
        std::uint64_t hi = 1;
        while (tail(hi) >= u) {
          if (hi > (std::uint64_t{1} << 62)) return hi;
          hi *= 2;
        }
        std::uint64_t lo = hi / 2;  // tail(lo) >= u (lo = 0 when hi = 1)
        while (hi - lo > 1) {
          std::uint64_t mid = lo + (hi - lo) / 2;
          if (tail(mid) >= u) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        return lo;
      }
    }
  }

  /// Shannon entropy of p restricted to indices <= imax (natural log).
  long double entropy_prefix(std::uint64_t imax) const {
    long double h = 0;
    for (std::uint64_t j = 0; j <= imax; ++j) {
      long double m = mass(j);
      if (m > 0) h -= m * std::log(m);
    }
    return h;
  }

  /// sum_{i >= 0} (a+i)^{-s} via direct summation and an Euler-Maclaurin tail.
  static long double hurwitz(long double s, long double a) {
    constexpr int direct = 16;
    long double sum = 0;
    for (int i = 0; i < direct; ++i) sum += std::pow(a + i, -s);
    long double b = a + direct;
    long double bs = std::pow(b, -s);
    sum += b * bs / (s - 1) + bs / 2;
    // Bernoulli corrections B_{2k}/(2k)! for k = 1..5.
    static constexpr long double coef[] = {1.0L / 12, -1.0L / 720, 1.0L / 30240,
                                           -1.0L / 1209600, 1.0L / 47900160};
    long double term = s * bs / b;
    for (int k = 0; k < 5; ++k) {
      sum += coef[k] * term;
      term *= (s + 2 * k + 1) * (s + 2 * k + 2) / (b * b);
    }
    return sum;
  }

 private:
  struct CustomState {
    std::function<long double(std::uint64_t)> mass;
    std::string label;
    std::vector<long double> prefix;
  };

  static mpq_class pow_q(const mpq_class& r, std::uint64_t j) {
    mpz_class num, den;
    mpz_pow_ui(num.get_mpz_t(), r.get_num_mpz_t(), static_cast<unsigned long>(j));
    mpz_pow_ui(den.get_mpz_t(), r.get_den_mpz_t(), static_cast<unsigned long>(j));
    return mpq_class(num, den);
  }

  Kind kind_ = Kind::telescoping;
  TailClass class_ = TailClass::polynomial_decay;
  double decay_exponent_ = 2;
  long double zeta_total_ = 1;
  mpq_class ratio_ = 0;
  long double ratio_ld_ = 0;
  std::vector<mpq_class> finite_;
  std::vector<mpq_class> finite_tail_;
  std::shared_ptr<CustomState> custom_;
};

/// Records of a sequence X_1..X_n (indices are 1-based in the accessors).
struct RecordTrace {
  std::vector<std::uint64_t> values;
  std::vector<std::uint64_t> running_max;
  std::vector<std::size_t> record_times;
  std::vector<std::uint64_t> record_values;
  /// simple[n-1]: M_n is attained exactly once among X_1..X_n.
  std::vector<bool> simple;
  std::vector<bool> is_record;

  std::size_t length() const { return values.size(); }
};

/// Incremental record bookkeeping. A value equal to the running maximum is a
/// record (ties count).
class RecordTracker {
 public:
  void push(std::uint64_t x) {
    ++n_;
    if (n_ == 1 || x > max_) {
      max_ = x;
      count_ = 1;
      last_record_time_ = n_;
      record_ = true;
      ++records_;
    } else if (x == max_) {
      ++count_;
      last_record_time_ = n_;
      record_ = true;
      ++records_;
    } else {
      record_ = false;
    }
  }
  std::size_t n() const { return n_; }
  std::uint64_t max() const { return max_; }
  bool simple() const { return count_ == 1; }
  bool last_was_record() const { return record_; }
  std::size_t record_count() const { return records_; }

 private:
  std::size_t n_ = 0;
  std::uint64_t max_ = 0;
  std::size_t count_ = 0;
  std::size_t last_record_time_ = 0;
  std::size_t records_ = 0;
  bool record_ = false;
};

inline RecordTrace record_times(const std::vector<std::uint64_t>& values) {
  if (values.empty()) throw std::invalid_argument("record_times of empty sequence");
  RecordTrace t;
  t.values = values;
  RecordTracker tr;
  for (std::size_t i = 0; i < values.size(); ++i) {
    tr.push(values[i]);
    t.running_max.push_back(tr.max());
    t.simple.push_back(tr.simple());
    t.is_record.push_back(tr.last_was_record());
    if (tr.last_was_record()) {
      t.record_times.push_back(i + 1);
      t.record_values.push_back(values[i]);
    }
  }
  return t;
}

/// True iff exactly one index i <= n attains M_n.
inline bool is_simple_record(const RecordTrace& trace, std::size_t n) {
  if (n < 1 || n > trace.length()) throw std::out_of_range("record index out of range");
  return trace.simple[n - 1];
}

/// "n,X_n,M_n,is_record,is_simple" rows with a header line.
inline std::string trace_csv(const RecordTrace& t) {
  std::ostringstream os;
  os << "n,X_n,M_n,is_record,is_simple\n";
  for (std::size_t i = 0; i < t.length(); ++i) {
    os << (i + 1) << ',' << t.values[i] << ',' << t.running_max[i] << ','
       << (t.is_record[i] ? 1 : 0) << ',' << (t.simple[i] ? 1 : 0) << '\n';
  }
  return os.str();
}

struct CriterionVerdict {
  enum class Kind { converges, diverges, undetermined };
  Kind kind;
  long double partial_sum = 0;
  std::string reason;
};

inline const char* to_string(CriterionVerdict::Kind k) {
  switch (k) {
    case CriterionVerdict::Kind::converges: return "converges";
    case CriterionVerdict::Kind::diverges: return "diverges";
    default: return "undetermined";
  }
}

/// Decides whether sum_j (p_j / tail(j))^2 converges. Only the tail class is
/// trusted for a verdict; custom distributions get the partial sum.
inline CriterionVerdict simple_records_criterion(const TailDistribution& p,
                                                 std::uint64_t partial_terms) {
  long double sum = 0;
  for (std::uint64_t j = 0; j < partial_terms; ++j) {
    long double t = p.tail(j);
    if (t <= 0) break;
    long double r = p.mass(j) / t;
    sum += r * r;
  }
  switch (p.tail_class()) {
    case TailClass::polynomial_decay:
      return {CriterionVerdict::Kind::converges, sum, "polynomial decay"};
    case TailClass::geometric:
      return {CriterionVerdict::Kind::diverges, sum, "constant ratio p_j/tail(j) = 1-r"};
    case TailClass::explicit_finite:
      return {CriterionVerdict::Kind::diverges, sum, "finite support"};
    case TailClass::custom:
      return {CriterionVerdict::Kind::undetermined, sum, "no tail class"};
  }
  return {CriterionVerdict::Kind::undetermined, sum, ""};
}

/// Phi(r) = max_{r' <= r} ceil((r'+2)^2 / tail(r')), saturating at UINT64_MAX.
/// Exact when the tail is exact.
class Gauge {
 public:
  explicit Gauge(TailDistribution p) : p_(std::move(p)) {}

  std::uint64_t operator()(std::uint64_t r) const {
    if (auto top = p_.support_max(); top && r > *top) {
      throw std::out_of_range("gauge argument beyond the support");
    }
    while (cache_.size() <= r) {
      std::uint64_t raw = raw_value(cache_.size());
      cache_.push_back(cache_.empty() ? raw : std::max(cache_.back(), raw));
    }
    return cache_[r];
  }

  const TailDistribution& distribution() const { return p_; }

 private:
  std::uint64_t raw_value(std::uint64_t r) const {
    constexpr auto cap = std::numeric_limits<std::uint64_t>::max();
    mpz_class sq = mpz_class(static_cast<unsigned long>(r)) + 2;
    sq *= sq;
    if (auto t = p_.exact_tail(r)) {
      if (*t <= 0) throw std::out_of_range("gauge argument beyond the support");
      mpq_class v = mpq_class(sq) / *t;
      mpz_class c;
      mpz_cdiv_q(c.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
      if (c > mpz_class(std::to_string(cap))) return cap;
      return std::stoull(c.get_str());
    }
    long double t = p_.tail(r);
    if (t <= 0) throw std::out_of_range("gauge argument beyond the support");
    long double v = std::ceil(static_cast<long double>(sq.get_d()) / t);
    if (v >= static_cast<long double>(cap)) return cap;
    return static_cast<std::uint64_t>(v);
  }

  TailDistribution p_;
  mutable std::vector<std::uint64_t> cache_;
};

/// One trajectory of i.i.d. draws from p, summarized for the simplicity and
/// gauge statistics.
struct RecordRun {
  std::uint64_t seed = 0;
  bool simple_at_horizon = false;
  std::size_t nonsimple_steps = 0;
  /// Last n <= horizon with a non-simple record, 0 when there is none.
  std::size_t last_violation = 0;
  std::size_t records = 0;
  std::uint64_t max = 0;
  /// T_{k+1} <= Phi(R_k) for every record k with T_k > horizon/10 and
  /// T_{k+1} <= horizon. For finite support, records at the support maximum
  /// are frozen (only ties can follow) and are not checked.
  bool gauge_ok = true;
};

inline RecordRun record_run(const TailDistribution& p, const Gauge& phi, std::size_t horizon,
                            std::uint64_t seed) {
  RecordRun r;
  r.seed = seed;
  Rng rng(seed);
  RecordTracker tr;
  auto top = p.support_max();
  std::size_t last_time = 0;
  std::uint64_t last_value = 0;
  for (std::size_t n = 1; n <= horizon; ++n) {
    tr.push(p.sample(rng));
    if (!tr.simple()) {
      r.last_violation = n;
      ++r.nonsimple_steps;
    }
    if (!tr.last_was_record()) continue;
    bool frozen = top && last_value == *top;
    if (last_time > horizon / 10 && !frozen && n > phi(last_value)) r.gauge_ok = false;
    last_time = n;
    last_value = tr.max();
  }
  r.simple_at_horizon = horizon > 0 && tr.simple();
  r.records = tr.record_count();
  r.max = tr.max();
  return r;
}

/// Share of trajectories passing the gauge check of record_run. Trajectory i
/// uses derive_seed(seed, i).
inline double empirical_gauge_validation(const TailDistribution& p, std::size_t horizon,
                                         std::size_t trials, std::uint64_t seed) {
  if (horizon == 0 || trials == 0) return 1.0;
  Gauge phi(p);
  std::size_t good = 0;
  for (std::size_t i = 0; i < trials; ++i) good += record_run(p, phi, horizon, derive_seed(seed, i)).gauge_ok;
  return static_cast<double>(good) / static_cast<double>(trials);
}

struct SimplicityStats {
  std::size_t trials = 0;
  /// Share of trajectories whose record at the horizon is simple.
  double fraction_simple_at_horizon = 0;
  /// Mean over trajectories of the last n <= horizon with a non-simple record
  /// (0 when there is none).
  double mean_last_violation_index = 0;
  /// Share of all (trajectory, step) pairs whose current record is non-simple.
  double fraction_nonsimple_steps = 0;
};

inline SimplicityStats simplicity_stats(const std::vector<RecordRun>& runs, std::size_t horizon) {
  SimplicityStats s;
  s.trials = runs.size();
  if (runs.empty() || horizon == 0) return s;
  std::size_t simple_at_end = 0, nonsimple_steps = 0;
  double last_violation_sum = 0;
  for (const auto& r : runs) {
    simple_at_end += r.simple_at_horizon ? 1 : 0;
    nonsimple_steps += r.nonsimple_steps;
    last_violation_sum += static_cast<double>(r.last_violation);
  }
  const auto n = static_cast<double>(runs.size());
  s.fraction_simple_at_horizon = static_cast<double>(simple_at_end) / n;
  s.mean_last_violation_index = last_violation_sum / n;
  s.fraction_nonsimple_steps = static_cast<double>(nonsimple_steps) / (n * static_cast<double>(horizon));
  return s;
}

inline SimplicityStats empirical_eventual_simplicity(const TailDistribution& p,
                                                     std::size_t horizon, std::size_t trials,
                                                     std::uint64_t seed) {
  if (trials == 0 || horizon == 0) {
    SimplicityStats s;
    s.trials = trials;
    return s;
  }
  Gauge phi(p);
  std::vector<RecordRun> runs;
  for (std::size_t i = 0; i < trials; ++i) runs.push_back(record_run(p, phi, horizon, derive_seed(seed, i)));
  return simplicity_stats(runs, horizon);
}

/// X_1..X_n drawn from p with one generator.
inline std::vector<std::uint64_t> sample_sequence(const TailDistribution& p, std::size_t n,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint64_t> out(n);
  for (auto& x : out) x = p.sample(rng);
  return out;
}

}  // namespace srs

#endif  // SRSLAB_RECORDS_HPP
