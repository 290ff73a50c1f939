#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>

namespace tcof {

// 64-bit FNV-1a, used for cache keys.
class Fnv1a {
 public:
  Fnv1a& update(std::span<const unsigned char> bytes) noexcept {
    for (unsigned char b : bytes) {
      state_ ^= b;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& update(std::string_view text) noexcept {
    update({reinterpret_cast<const unsigned char*>(text.data()), text.size()});
    // Length terminator keeps ("ab","c") distinct from ("a","bc").
    return update(static_cast<std::uint64_t>(text.size()));
  }
  Fnv1a& update(std::uint64_t value) noexcept {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    return update(std::span<const unsigned char>(bytes, 8));
  }

  std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

// Hash of a file's bytes.
std::uint64_t hash_file(const std::filesystem::path& path);

}  // namespace tcof
