#ifndef SRSLAB_GROUP_HPP
#define SRSLAB_GROUP_HPP

#include <concepts>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace srs {

/// A group family instance. Elements are immutable values in canonical form,
/// so `==` decides equality in the group and `std::hash` is consistent with it.
template <class G>
concept Group = requires(const G& g, const typename G::element_type& x,
                         std::string_view text) {
  typename G::element_type;
  { g.identity() } -> std::convertible_to<typename G::element_type>;
  { g.mul(x, x) } -> std::convertible_to<typename G::element_type>;
  { g.inv(x) } -> std::convertible_to<typename G::element_type>;
  { g.generators() } -> std::convertible_to<std::vector<typename G::element_type>>;
  { g.format(x) } -> std::convertible_to<std::string>;
  { g.parse(text) } -> std::convertible_to<typename G::element_type>;
  { g.name() } -> std::convertible_to<std::string>;
  { x == x } -> std::convertible_to<bool>;
  { std::hash<typename G::element_type>{}(x) } -> std::convertible_to<std::size_t>;
};

template <Group G>
using element_t = typename G::element_type;

/// Thrown when two elements from different group instances are combined.
class group_mismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// w^{-1} q w. Families with a cheaper route (local supports, lamp-only
/// elements) provide `conj(w, q)`.
template <Group G>
element_t<G> conjugate_by(const G& group, const element_t<G>& w,
                          const element_t<G>& q) {
  if constexpr (requires { group.conj(w, q); }) {
    return group.conj(w, q);
  } else {
    return group.mul(group.inv(w), group.mul(q, w));
  }
}

/// x^k by repeated squaring; negative k uses the inverse.
template <Group G>
element_t<G> power(const G& group, element_t<G> x, long long k) {
  if (k < 0) {
    x = group.inv(x);
    k = -k;
  }
  element_t<G> result = group.identity();
  while (k > 0) {
    if (k & 1) result = group.mul(result, x);
    k >>= 1;
    if (k > 0) x = group.mul(x, x);
  }
  return result;
}

template <Group G>
struct ElementHash {
  std::size_t operator()(const element_t<G>& x) const {
    return std::hash<element_t<G>>{}(x);
  }
};

inline std::size_t hash_combine(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace srs

#endif  // SRSLAB_GROUP_HPP
