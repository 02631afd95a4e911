#include "xaistudy/common/hash.hpp"

#include <bit>
#include <cstdio>

namespace xaistudy {

Fnv1a& Fnv1a::update(std::string_view bytes) {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= 0x100000001b3ULL;
  }
  // Length terminator keeps ("ab","c") distinct from ("a","bc").
  return update_length(bytes.size());
}

Fnv1a& Fnv1a::update(double value) { return update(std::bit_cast<std::uint64_t>(value)); }

Fnv1a& Fnv1a::update(std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    state_ ^= (value >> (8 * i)) & 0xffU;
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

Fnv1a& Fnv1a::update_length(std::uint64_t n) { return update(n); }

std::string Fnv1a::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

std::string fingerprint(std::string_view bytes) { return Fnv1a().update(bytes).hex(); }

}  // namespace xaistudy
