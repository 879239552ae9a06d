#include "tollcast/core/digest.hpp"

#include <fstream>
#include <iterator>
#include <stdexcept>
#include <vector>

#include <openssl/sha.h>

#include "tollcast/core/seed.hpp"

namespace tollcast {

Sha256 sha256(std::span<const std::uint8_t> bytes) {
  Sha256 out{};
  SHA256(bytes.data(), bytes.size(), out.data());
  return out;
}

Sha256 sha256(std::string_view text) {
  return sha256(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string to_hex(const Sha256& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (auto b : digest) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 0xF]);
  }
  return s;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>()};
  return to_hex(sha256(bytes));
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view name, std::uint64_t index) {
  std::string material(name);
  for (int i = 0; i < 8; ++i) material.push_back(static_cast<char>((base >> (8 * i)) & 0xFF));
  for (int i = 0; i < 8; ++i) material.push_back(static_cast<char>((index >> (8 * i)) & 0xFF));
  const Sha256 h = sha256(material);
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) seed |= static_cast<std::uint64_t>(h[i]) << (8 * i);
  return seed;
}

}  // namespace tollcast
