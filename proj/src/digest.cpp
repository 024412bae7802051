#include "locomp/digest.hpp"

#include <openssl/sha.h>

#include "locomp/error.hpp"
#include "locomp/fileutil.hpp"

namespace locomp {

Sha256 sha256(std::span<const std::uint8_t> data) {
  Sha256 out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(data.size() * 2);
  for (auto b : data) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xf]);
  }
  return s;
}

std::string sha256_file_hex(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return to_hex(sha256(bytes));
}

}  // namespace locomp
