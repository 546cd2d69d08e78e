#ifndef SRSLAB_ENUMERATION_HPP
#define SRSLAB_ENUMERATION_HPP

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "srslab/group.hpp"

namespace srs {

/// Lazy total enumeration of a finitely generated group: breadth first by word
/// length over the group's generator list, words of equal length in
/// lexicographic order of generator indices, keeping the first word reaching
/// each element. at(0) is the identity.
template <Group G>
class Enumerator {
 public:
  using E = element_t<G>;

  explicit Enumerator(G group) : group_(std::move(group)), gens_(group_.generators()) {
    seen_.insert(group_.identity());
    elements_.push_back(group_.identity());
    lengths_.push_back(0);
  }

  const G& group() const { return group_; }

  /// Element i; throws std::out_of_range when the group is finite and has
  /// fewer than i+1 elements.
  const E& at(std::size_t i) {
    while (elements_.size() <= i) {
      if (!grow()) throw std::out_of_range("enumeration exhausted (finite group)");
    }
    return elements_[i];
  }

  /// First `count` elements (fewer if the group is smaller).
  std::vector<E> prefix(std::size_t count) {
    while (elements_.size() < count && grow()) {
    }
    std::size_t k = std::min(count, elements_.size());
    return std::vector<E>(elements_.begin(), elements_.begin() + static_cast<std::ptrdiff_t>(k));
  }

  /// Word length of element i under the BFS.
  std::size_t length_of(std::size_t i) {
    at(i);
    return lengths_[i];
  }

 private:
  bool grow() {
    while (cursor_ < elements_.size()) {
      if (gen_index_ >= gens_.size()) {
        gen_index_ = 0;
        ++cursor_;
        continue;
      }
      E candidate = group_.mul(elements_[cursor_], gens_[gen_index_++]);
      if (seen_.insert(candidate).second) {
        elements_.push_back(std::move(candidate));
        lengths_.push_back(lengths_[cursor_] + 1);
        return true;
      }
    }
    return false;
  }

  G group_;
  std::vector<E> gens_;
  std::vector<E> elements_;
  std::unordered_set<E> seen_;
  std::size_t cursor_ = 0;
  std::size_t gen_index_ = 0;
  std::vector<std::size_t> lengths_;
};

}  // namespace srs

#endif  // SRSLAB_ENUMERATION_HPP
