#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace sonoclass {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

// 64-bit FNV-1a. Stable across platforms; used for cache keys and split
// fingerprints, not for security.
inline std::uint64_t fnv1a(std::span<const unsigned char> bytes,
                           std::uint64_t state = kFnvOffset) {
  for (unsigned char b : bytes) {
    state ^= b;
    state *= 0x100000001b3ULL;
  }
  return state;
}

inline std::uint64_t fnv1a(std::string_view text,
                           std::uint64_t state = kFnvOffset) {
  return fnv1a({reinterpret_cast<const unsigned char*>(text.data()), text.size()},
               state);
}

inline std::string hex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace sonoclass
