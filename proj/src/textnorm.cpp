#include "smsguard/textnorm.hpp"

#include "smsguard/util.hpp"

namespace smsguard::textnorm {

namespace {

void validate(Lexicon& lex) {
  for (auto& [variant, canonical] : lex.entries) {
    if (variant == util::to_lower(canonical))
      throw DataError("lexicon maps token to itself: " + variant);
    auto it = lex.entries.find(util::to_lower(canonical));
    if (it != lex.entries.end())
      throw DataError("lexicon chain: '" + variant + "' -> '" + canonical +
                      "' but '" + it->first + "' is also a variant key");
  }
}

// Token core boundaries: strip leading/trailing ASCII punctuation.
std::pair<std::size_t, std::size_t> core_bounds(const std::string& tok) {
  std::size_t b = 0, e = tok.size();
  while (b < e && static_cast<unsigned char>(tok[b]) < 0x80 && !util::is_ascii_alnum(tok[b])) ++b;
  while (e > b && static_cast<unsigned char>(tok[e - 1]) < 0x80 && !util::is_ascii_alnum(tok[e - 1])) --e;
  return {b, e};
}

}  // namespace

Lexicon load_lexicon(const std::filesystem::path& path) {
  Lexicon lex;
  lex.version = path.filename().string();
  auto lines = util::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      throw DataError("malformed lexicon line " + std::to_string(i + 1) + " in " + path.string());
    std::string variant = util::to_lower(line.substr(0, tab));
    std::string canonical = line.substr(tab + 1);
    if (canonical.find('\t') != std::string::npos)
      throw DataError("malformed lexicon line " + std::to_string(i + 1) + " in " + path.string());
    if (!lex.entries.emplace(variant, canonical).second)
      throw DataError("duplicate lexicon key '" + variant + "' at line " + std::to_string(i + 1));
  }
  validate(lex);
  return lex;
}

Lexicon make_lexicon(const std::vector<std::pair<std::string, std::string>>& pairs,
                     const std::string& version) {
  Lexicon lex;
  lex.version = version;
  for (auto& [variant, canonical] : pairs) {
    if (!lex.entries.emplace(util::to_lower(variant), canonical).second)
      throw DataError("duplicate lexicon key '" + variant + "'");
  }
  validate(lex);
  return lex;
}

NormalizedText normalize(const std::string& text, const Lexicon& lexicon,
                         const std::vector<Span>& masked) {
  NormalizedText out;
  out.original = text;
  util::Utf8Index index(text);

  auto overlaps_mask = [&](std::size_t cp_start, std::size_t cp_end) {
    for (const Span& m : masked)
      if (cp_start < m.end && m.start < cp_end) return true;
    return false;
  };

  std::string normalized;
  for (auto& [byte_off, tok] : util::whitespace_tokens(text)) {
    std::string rewritten = tok;
    auto [cb, ce] = core_bounds(tok);
    if (ce > cb) {
      std::string key = util::to_lower(tok.substr(cb, ce - cb));
      auto it = lexicon.entries.find(key);
      if (it != lexicon.entries.end()) {
        std::size_t cp_start = index.cp_of_byte(byte_off + cb);
        std::size_t cp_end = index.cp_of_byte(byte_off + ce - 1) + 1;
        std::size_t tok_cp_start = index.cp_of_byte(byte_off);
        std::size_t tok_cp_end = tok_cp_start + util::count_codepoints(tok);
        if (!overlaps_mask(tok_cp_start, tok_cp_end)) {
          rewritten = tok.substr(0, cb) + it->second + tok.substr(ce);
          out.substitutions.push_back({cp_start, cp_end, tok.substr(cb, ce - cb), it->second});
        }
      }
    }
    if (!normalized.empty()) normalized.push_back(' ');
    normalized += rewritten;
  }
  out.normalized = std::move(normalized);
  return out;
}

}  // namespace smsguard::textnorm
