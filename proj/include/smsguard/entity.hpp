#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace smsguard::entity {

enum class EntityKind { Url = 0, Phone, Email, Timex, Number, Currency };
inline constexpr std::size_t kNumEntityKinds = 6;

enum class PositionCode : int { Absent = -1, Begin = 0, Middle = 1, End = 2 };

struct Entity {
  EntityKind kind;
  std::string raw;        // text as it appeared
  std::string canonical;  // deobfuscated form
  std::size_t start = 0;  // code point span [start, end)
  std::size_t end = 0;
};

struct EntitySet {
  std::vector<Entity> entities;
  std::array<int, kNumEntityKinds> counts{};

  int count(EntityKind k) const { return counts[static_cast<std::size_t>(k)]; }
  const Entity* first(EntityKind k) const;
  std::vector<const Entity*> of_kind(EntityKind k) const;
};

struct TldTables {
  std::unordered_set<std::string> bad;
  std::unordered_set<std::string> suspicious;
  std::unordered_set<std::string> normal;
  std::unordered_set<std::string> shorteners;  // hostnames like bit.ly
};

// All extractor data tables; loaded once, immutable afterwards.
struct Resources {
  TldTables tlds;
  std::unordered_set<std::string> valid_tlds;       // IANA snapshot + the three TLD sets
  std::unordered_set<std::string> public_suffixes;  // registrable-domain computation
  std::unordered_set<std::string> common_words;     // word-vs-domain disambiguation
  std::unordered_set<std::string> timex_words;
  std::unordered_set<std::string> currency_words;
  std::unordered_set<std::string> freemail;         // EMAIL_ISFREE providers
  std::vector<std::string> tollfree_prefixes;       // PHONE_ISFREE prefixes

  static Resources load(const std::filesystem::path& data_dir);
};

struct DomainParts {
  std::string host;
  std::string registrable;
  std::string tld;
};

EntitySet extract_entities(const std::string& text, const Resources& res);

// Thirds rule: Begin if the span starts in the first third, End if it ends in
// the last third, Middle otherwise.
PositionCode position_code(std::pair<std::size_t, std::size_t> span, std::size_t text_length);

DomainParts parse_domain(const std::string& url_canonical, const Resources& res);

bool is_shortener(const std::string& host, const TldTables& tables);
bool is_tollfree(const std::string& phone_canonical, const Resources& res);
bool is_freemail(const std::string& email_canonical, const Resources& res);

}  // namespace smsguard::entity
