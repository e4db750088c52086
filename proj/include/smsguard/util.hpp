#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smsguard {

// Exit-code contract: 2 = data error, 3 = model/schema mismatch.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace util {

// Code-point-indexed view of a UTF-8 string. Spans in the public API are
// code point offsets; internally we work on bytes and translate at the edge.
class Utf8Index {
 public:
  explicit Utf8Index(std::string_view text);

  std::size_t codepoints() const { return byte_of_cp_.size(); }
  std::size_t byte_of_cp(std::size_t cp) const;   // cp == codepoints() -> text size
  std::size_t cp_of_byte(std::size_t byte) const; // byte must start a code point

 private:
  std::size_t text_bytes_;
  std::vector<std::uint32_t> byte_of_cp_;
  std::vector<std::uint32_t> cp_of_byte_;
};

std::size_t count_codepoints(std::string_view text);

std::string to_lower(std::string_view s); // ASCII lowering only
bool is_ascii_digit(char c);
bool is_ascii_alpha(char c);
bool is_ascii_alnum(char c);

// Splits on runs of ASCII whitespace; returns (byte offset, token) pairs.
std::vector<std::pair<std::size_t, std::string>> whitespace_tokens(std::string_view text);

std::string collapse_whitespace(std::string_view text);

std::vector<std::string> read_lines(const std::filesystem::path& path);

// Line-oriented list file: UTF-8, one entry per line, '#' comments and blank
// lines ignored, entries lowercased.
std::vector<std::string> read_list_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// splitmix64; used to derive independent per-tree RNG streams from one seed.
std::uint64_t mix64(std::uint64_t x);

// FNV-1a, used for config fingerprints.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 1469598103934665603ULL);

std::string hex64(std::uint64_t v);

}  // namespace util
}  // namespace smsguard
