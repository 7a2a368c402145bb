#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

namespace molga::util {

// FNV-1a, 64 bit. Used for canonical keys and fingerprint ids; must be
// stable across platforms, so no std::hash anywhere in hashed paths.
class Fnv1a {
public:
  static constexpr std::uint64_t kOffset = 14695981039346656037ull;
  static constexpr std::uint64_t kPrime = 1099511628211ull;

  Fnv1a() = default;

  Fnv1a& bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= kPrime;
    }
    return *this;
  }

  Fnv1a& u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    return bytes(buf, 8);
  }

  Fnv1a& i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }

  Fnv1a& str(std::string_view s) { return bytes(s.data(), s.size()); }

  std::uint64_t value() const { return state_; }

private:
  std::uint64_t state_ = kOffset;
};

std::string hex64(std::uint64_t v);

}  // namespace molga::util
