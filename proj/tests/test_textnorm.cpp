#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "smsguard/textnorm.hpp"
#include "smsguard/util.hpp"

using namespace smsguard;
using textnorm::Lexicon;
using textnorm::make_lexicon;
using textnorm::normalize;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

// invariant oracle: apply recorded substitutions to the original, then
// collapse whitespace
std::string apply_substitutions(const textnorm::NormalizedText& nt) {
  util::Utf8Index index(nt.original);
  std::string out = nt.original;
  for (auto it = nt.substitutions.rbegin(); it != nt.substitutions.rend(); ++it) {
    std::size_t b = index.byte_of_cp(it->start);
    std::size_t e = index.byte_of_cp(it->end);
    out = out.substr(0, b) + it->canonical + out.substr(e);
  }
  return util::collapse_whitespace(out);
}

}  // namespace

TEST_CASE("load_lexicon single entry") {
  auto p = write_temp("lex1.tsv", "u\tyou\n");
  auto lex = textnorm::load_lexicon(p);
  CHECK(lex.entries.size() == 1);
  CHECK(lex.entries.at("u") == "you");
}

TEST_CASE("load_lexicon rejects duplicate keys") {
  auto p = write_temp("lex2.tsv", "u\tyou\nu\tyour\n");
  CHECK_THROWS_AS(textnorm::load_lexicon(p), DataError);
}

TEST_CASE("load_lexicon rejects rewrite chains") {
  auto p = write_temp("lex3.tsv", "2nite\ttonight\ntonight\tnight\n");
  CHECK_THROWS_AS(textnorm::load_lexicon(p), DataError);
}

TEST_CASE("load_lexicon rejects self mapping and malformed lines") {
  CHECK_THROWS_AS(textnorm::load_lexicon(write_temp("lex4.tsv", "you\tyou\n")), DataError);
  CHECK_THROWS_AS(textnorm::load_lexicon(write_temp("lex5.tsv", "nosep\n")), DataError);
  CHECK_THROWS_AS(textnorm::load_lexicon("/nonexistent/lexicon.tsv"), DataError);
}

TEST_CASE("normalize replaces variants and records substitutions") {
  auto lex = make_lexicon({{"c", "see"}, {"u", "you"}, {"2nite", "tonight"}});
  auto nt = normalize("c u 2nite", lex);
  CHECK(nt.normalized == "see you tonight");
  CHECK(nt.substitutions.size() == 3);
  CHECK(apply_substitutions(nt) == nt.normalized);
}

TEST_CASE("normalize identity case") {
  auto lex = make_lexicon({{"u", "you"}});
  auto nt = normalize("hello world", lex);
  CHECK(nt.normalized == "hello world");
  CHECK(nt.substitutions.empty());
}

TEST_CASE("normalize preserves punctuation around the core") {
  auto lex = make_lexicon({{"2nite", "tonight"}});
  auto nt = normalize("see you 2nite!", lex);
  CHECK(nt.normalized == "see you tonight!");
  CHECK(nt.substitutions.size() == 1);
  CHECK(nt.substitutions[0].variant == "2nite");
  CHECK(apply_substitutions(nt) == nt.normalized);
}

TEST_CASE("normalize never rewrites inside masked entity spans") {
  auto lex = make_lexicon({{"2nite", "tonight"}});
  std::string text = "visit 2nite.example.com 2nite";
  // oracle: entity span covers the URL token, code points 6..23
  auto nt = normalize(text, lex, {{6, 23}});
  CHECK(nt.normalized == "visit 2nite.example.com tonight");
  CHECK(nt.substitutions.size() == 1);
  CHECK(nt.substitutions[0].start == 24);
}

TEST_CASE("normalize is idempotent") {
  auto lex = make_lexicon({{"c", "see"}, {"u", "you"}, {"2nite", "tonight"}, {"gr8", "great"}});
  for (const char* text : {"c u 2nite", "gr8 c ya", "hello there", "U. C? 2NITE!"}) {
    auto once = normalize(text, lex);
    auto twice = normalize(once.normalized, lex);
    CHECK(twice.substitutions.empty());
    CHECK(twice.normalized == once.normalized);
  }
}

TEST_CASE("normalize keeps word count and collapses whitespace") {
  auto lex = make_lexicon({{"u", "you"}});
  auto nt = normalize("  hey   u   there ", lex);
  CHECK(nt.normalized == "hey you there");
  CHECK(util::whitespace_tokens(nt.normalized).size() ==
        util::whitespace_tokens(nt.original).size());
}

TEST_CASE("substitution count equals lexicon-key token count outside masks") {
  auto lex = make_lexicon({{"u", "you"}, {"m8", "mate"}});
  auto nt = normalize("u m8 u stranger", lex);
  CHECK(nt.substitutions.size() == 3);
}

TEST_CASE("bundled lexicon loads and satisfies invariants") {
  auto lex = textnorm::load_lexicon(std::filesystem::path(SMSGUARD_DATA_DIR) / "lexicon.tsv");
  CHECK(lex.entries.size() >= 300);
  CHECK(lex.entries.at("2nite") == "tonight");
  CHECK(lex.entries.at("c") == "see");
  CHECK(lex.entries.at("u") == "you");
}
