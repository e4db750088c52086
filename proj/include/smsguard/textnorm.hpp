#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace smsguard::textnorm {

// Variant -> canonical dictionary. Immutable after load, shareable.
struct Lexicon {
  std::unordered_map<std::string, std::string> entries;  // lowercased variant -> canonical
  std::string version;
};

struct Substitution {
  std::size_t start = 0;  // code point span of the variant core in the original
  std::size_t end = 0;
  std::string variant;
  std::string canonical;
};

struct NormalizedText {
  std::string original;
  std::string normalized;
  std::vector<Substitution> substitutions;
};

// Code point span [start, end); used to protect entity text from rewriting.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
};

// One `variant<TAB>canonical` pair per line, '#' comments ignored.
// Rejects duplicate keys, self-mappings and rewrite chains.
Lexicon load_lexicon(const std::filesystem::path& path);

Lexicon make_lexicon(const std::vector<std::pair<std::string, std::string>>& pairs,
                     const std::string& version = "inline");

// Token-wise dictionary replacement; tokens overlapping a masked span are left
// alone. Whitespace is collapsed to single spaces in the output.
NormalizedText normalize(const std::string& text, const Lexicon& lexicon,
                         const std::vector<Span>& masked = {});

}  // namespace smsguard::textnorm
