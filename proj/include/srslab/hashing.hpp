#ifndef SRSLAB_HASHING_HPP
#define SRSLAB_HASHING_HPP

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace srs {

/// FNV-1a, 64 bit. Stable across platforms; used for fingerprints and
/// artifact content hashes.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      h_ ^= c;
      h_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& update_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xff;
      h_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a64(std::string_view bytes) { return Fnv1a().update(bytes).value(); }

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace srs

#endif  // SRSLAB_HASHING_HPP
