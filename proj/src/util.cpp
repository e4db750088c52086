#include "smsguard/util.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace smsguard::util {

namespace {

bool is_utf8_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

}  // namespace

Utf8Index::Utf8Index(std::string_view text) : text_bytes_(text.size()) {
  byte_of_cp_.reserve(text.size());
  cp_of_byte_.assign(text.size() + 1, 0);
  std::size_t cp = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_utf8_continuation(static_cast<unsigned char>(text[i]))) {
      byte_of_cp_.push_back(static_cast<std::uint32_t>(i));
      cp_of_byte_[i] = static_cast<std::uint32_t>(cp);
      ++cp;
    } else {
      cp_of_byte_[i] = static_cast<std::uint32_t>(cp - 1);
    }
  }
  cp_of_byte_[text.size()] = static_cast<std::uint32_t>(cp);
}

std::size_t Utf8Index::byte_of_cp(std::size_t cp) const {
  if (cp == byte_of_cp_.size()) return text_bytes_;
  return byte_of_cp_.at(cp);
}

std::size_t Utf8Index::cp_of_byte(std::size_t byte) const { return cp_of_byte_.at(byte); }

std::size_t count_codepoints(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char c : text)
    if (!is_utf8_continuation(c)) ++n;
  return n;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_alnum(char c) { return is_ascii_digit(c) || is_ascii_alpha(c); }

std::vector<std::pair<std::size_t, std::string>> whitespace_tokens(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    out.emplace_back(start, std::string(text.substr(start, i - start)));
  }
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out.push_back(' ');
      in_space = false;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> read_list_file(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for (auto& line : read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(to_lower(line));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

}  // namespace smsguard::util
