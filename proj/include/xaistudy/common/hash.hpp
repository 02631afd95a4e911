#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace xaistudy {

// Stable 64-bit FNV-1a. Used for fingerprints that must survive process
// restarts and platform changes, which std::hash does not guarantee.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes);
  Fnv1a& update(double value);
  Fnv1a& update(std::uint64_t value);
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  Fnv1a& update_length(std::uint64_t n);

  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string fingerprint(std::string_view bytes);

}  // namespace xaistudy
