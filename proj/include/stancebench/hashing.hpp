#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace stancebench {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_hex(std::span<const std::byte> bytes);

// Incremental SHA-256 for hashing several buffers without concatenating them.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes);
  void update(std::span<const std::byte> bytes);
  std::string hex_digest();

 private:
  void* ctx_;
};

// 64-bit FNV-1a; used to derive stable per-key RNG streams.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace stancebench
