// Independent brute-force membership used to cross-check the subgroup oracles.
#ifndef SRSLAB_TESTS_BRUTE_FORCE_HPP
#define SRSLAB_TESTS_BRUTE_FORCE_HPP

#include <cstddef>
#include <unordered_set>
#include <vector>

#include "srslab/chabauty.hpp"
#include "srslab/group.hpp"
#include "srslab/random.hpp"

namespace brute {

/// All products of length <= max_len over gens and their inverses.
template <srs::Group G>
std::unordered_set<srs::element_t<G>> word_ball(const G& group,
                                                std::vector<srs::element_t<G>> gens,
                                                std::size_t max_len) {
  std::size_t n = gens.size();
  for (std::size_t i = 0; i < n; ++i) gens.push_back(group.inv(gens[i]));
  std::unordered_set<srs::element_t<G>> seen{group.identity()};
  std::vector<srs::element_t<G>> frontier{group.identity()};
  for (std::size_t len = 0; len < max_len && !frontier.empty(); ++len) {
    std::vector<srs::element_t<G>> next;
    for (const auto& w : frontier) {
      for (const auto& s : gens) {
        auto x = group.mul(w, s);
        if (seen.insert(x).second) next.push_back(std::move(x));
      }
    }
    frontier = std::move(next);
  }
  return seen;
}

/// Window of all words of length <= max_len over the alphabet (and inverses),
/// in breadth-first order.
template <srs::Group G>
srs::Window<G> words_window(const G& group, const std::vector<srs::element_t<G>>& alphabet,
                            std::size_t max_len, const std::string& label) {
  srs::Window<G> w(label);
  std::vector<srs::element_t<G>> gens = alphabet;
  for (const auto& a : alphabet) gens.push_back(group.inv(a));
  std::vector<srs::element_t<G>> frontier{group.identity()};
  w.insert(group.identity());
  for (std::size_t len = 0; len < max_len; ++len) {
    std::vector<srs::element_t<G>> next;
    for (const auto& x : frontier) {
      for (const auto& s : gens) {
        auto y = group.mul(x, s);
        if (w.insert(y)) next.push_back(std::move(y));
      }
    }
    frontier = std::move(next);
  }
  return w;
}

/// `count` random words of length <= max_len over the alphabet and inverses.
template <srs::Group G>
srs::Window<G> random_words_window(const G& group, const std::vector<srs::element_t<G>>& alphabet,
                                   std::size_t max_len, std::size_t count, std::uint64_t seed,
                                   const std::string& label) {
  std::vector<srs::element_t<G>> gens = alphabet;
  for (const auto& a : alphabet) gens.push_back(group.inv(a));
  srs::Rng rng(seed);
  srs::Window<G> w(label);
  for (std::size_t i = 0; i < count; ++i) {
    auto len = rng.below(max_len + 1);
    auto x = group.identity();
    for (std::size_t j = 0; j < len; ++j) x = group.mul(x, gens[rng.below(gens.size())]);
    w.insert(x);
  }
  return w;
}

}  // namespace brute

#endif  // SRSLAB_TESTS_BRUTE_FORCE_HPP
