#include "smsguard/mela.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "smsguard/util.hpp"

namespace smsguard::mela {

using entity::EntityKind;
using entity::PositionCode;
using util::is_ascii_alnum;
using util::is_ascii_alpha;
using util::is_ascii_digit;
using util::to_lower;

namespace {

std::vector<std::string> build_message_schema() {
  std::vector<std::string> s = {
      "NUM_OF_URLS", "NUM_OF_PHONES", "NUM_OF_EMAILS", "URL_POS",    "PHONE_POS",
      "EMAIL_POS",   "NUMBER_POS",    "CONTAINS_FWD",  "LENGTH",     "WORD_COUNT",
      "PHONEME_COUNT"};
  for (std::size_t i = 0; i < kNumClusters; ++i)
    s.push_back("SUBSTRING_CLUST_" + std::to_string(i));
  for (const char* name :
       {"UNSUBSCRIBE", "PHONE_ISFREE", "EMAIL_ISFREE", "URL_ISDOM", "DOMAIN_MELASCORE",
        "DOMAIN_ISSHORT", "NGRAM_ENTROPY", "START_WITHNUMBER", "END_WITHNUMBER", "TOKEN_RATIO",
        "NUM_OF_TIMEX", "NUM_OF_NUMBER", "NUM_OF_CURRENCY", "STARTSWITH_HELLO", "ENDSWITH_CTA",
        "DOMAIN_OBFUSCATION", "HEUR_TWEET", "NUM_OF_OOV"})
    s.push_back(name);
  return s;
}

std::vector<std::string> build_domain_schema() {
  std::vector<std::string> s = {"STARTS_WITH_NUM", "ENDS_WITH_NUM", "CONTAINS_00",
                                "CONTAINS_VV",     "CONTAINS_YEAR", "CONTAINS_1",
                                "CONTAINS_ZERO",   "DIGIT_RATIO",   "HYPHEN_COUNT",
                                "LENGTH",          "WORD_COUNT",    "PHONEME_COUNT"};
  for (std::size_t i = 0; i < kNumClusters; ++i)
    s.push_back("SUBSTRING_CLUST_" + std::to_string(i));
  for (const char* name : {"CONTAINSWWW", "BADTLDS", "SUSPTLDS", "NORMALTLDS", "ISSHORT"})
    s.push_back(name);
  return s;
}

// vowel-group approximation of syllable count
int phoneme_count(const std::string& text) {
  auto is_vowel = [](char c) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
  };
  int groups = 0;
  bool in_group = false;
  for (char c : text) {
    if (is_ascii_alpha(c) && is_vowel(c)) {
      if (!in_group) ++groups;
      in_group = true;
    } else {
      in_group = false;
    }
  }
  return groups;
}

double trigram_entropy(const std::string& text) {
  if (util::count_codepoints(text) < 3) return 0.0;
  std::unordered_map<std::string, int> hist;
  int total = 0;
  // byte trigrams over the lowercased text; multibyte code points contribute
  // their byte sequence, which keeps the histogram deterministic
  std::string lower = to_lower(text);
  if (lower.size() < 3) return 0.0;
  for (std::size_t i = 0; i + 3 <= lower.size(); ++i) {
    hist[lower.substr(i, 3)]++;
    ++total;
  }
  double h = 0.0;
  for (const auto& [_, c] : hist) {
    double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

std::string strip_token(const std::string& tok) {
  std::size_t b = 0, e = tok.size();
  while (b < e && !is_ascii_alnum(tok[b])) ++b;
  while (e > b && !is_ascii_alnum(tok[e - 1])) --e;
  return to_lower(tok.substr(b, e - b));
}

bool contains_word(const std::string& lower_text, const std::string& word) {
  std::size_t pos = 0;
  while ((pos = lower_text.find(word, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !is_ascii_alnum(lower_text[pos - 1]);
    std::size_t end = pos + word.size();
    bool right_ok = end >= lower_text.size() || !is_ascii_alnum(lower_text[end]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

bool heur_tweet(const std::string& text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '#' && text[i] != '@') continue;
    if (i + 1 >= text.size()) continue;
    char next = text[i + 1];
    if (!(is_ascii_alnum(next) || next == '_')) continue;
    bool at_word_start = i == 0 || std::isspace(static_cast<unsigned char>(text[i - 1]));
    if (!at_word_start) continue;
    if (text[i] == '@') {
      // skip emails: local part would sit left of '@'
      if (i > 0 && is_ascii_alnum(text[i - 1])) continue;
    }
    return true;
  }
  return false;
}

}  // namespace

const std::vector<std::string>& message_schema() {
  static const std::vector<std::string> schema = build_message_schema();
  return schema;
}

const std::vector<std::string>& domain_schema() {
  static const std::vector<std::string> schema = build_domain_schema();
  return schema;
}

int message_slot(const std::string& name) {
  const auto& s = message_schema();
  auto it = std::find(s.begin(), s.end(), name);
  return it == s.end() ? -1 : static_cast<int>(it - s.begin());
}

KeywordLists KeywordLists::load(const std::filesystem::path& dir) {
  KeywordLists kw;
  kw.greetings = util::read_list_file(dir / "greetings.txt");
  kw.optout = util::read_list_file(dir / "optout.txt");
  kw.forward_markers = util::read_list_file(dir / "fwd.txt");
  return kw;
}

DomainVector domain_features(const std::string& registrable_domain, const std::string& tld,
                             const entity::TldTables& tables,
                             const cluster::ClusterMatcher& matcher, const std::string& host) {
  if (matcher.num_clusters() != kNumClusters)
    throw SchemaError("cluster matcher size does not match domain vector layout");
  DomainVector v;
  std::string domain = to_lower(registrable_domain);
  std::string label = domain;
  std::string tld_lower = to_lower(tld);
  if (!tld_lower.empty() && label.size() > tld_lower.size() + 1 &&
      label.compare(label.size() - tld_lower.size() - 1, std::string::npos,
                    "." + tld_lower) == 0)
    label.resize(label.size() - tld_lower.size() - 1);

  auto& f = v.values;
  std::size_t i = 0;
  f[i++] = !label.empty() && is_ascii_digit(label.front()) ? 1.0f : 0.0f;
  f[i++] = !label.empty() && is_ascii_digit(label.back()) ? 1.0f : 0.0f;
  f[i++] = label.find("00") != std::string::npos ? 1.0f : 0.0f;
  f[i++] = label.find("vv") != std::string::npos ? 1.0f : 0.0f;
  bool year = false;
  for (std::size_t p = 0; p + 4 <= label.size(); ++p) {
    if ((label.compare(p, 2, "19") == 0 || label.compare(p, 2, "20") == 0) &&
        is_ascii_digit(label[p + 2]) && is_ascii_digit(label[p + 3])) {
      year = true;
      break;
    }
  }
  f[i++] = year ? 1.0f : 0.0f;
  f[i++] = label.find('1') != std::string::npos ? 1.0f : 0.0f;
  f[i++] = label.find('0') != std::string::npos ? 1.0f : 0.0f;
  std::size_t digits = static_cast<std::size_t>(
      std::count_if(label.begin(), label.end(), [](char c) { return is_ascii_digit(c); }));
  f[i++] = label.empty() ? 0.0f : static_cast<float>(digits) / static_cast<float>(label.size());
  f[i++] = static_cast<float>(std::count(label.begin(), label.end(), '-'));
  f[i++] = static_cast<float>(label.size());
  int words = 0;
  bool in_word = false;
  for (char c : label) {
    if (is_ascii_alpha(c)) {
      if (!in_word) ++words;
      in_word = true;
    } else {
      in_word = false;
    }
  }
  f[i++] = static_cast<float>(words);
  f[i++] = static_cast<float>(phoneme_count(label));
  auto counts = matcher.count(label);
  for (std::size_t c = 0; c < kNumClusters; ++c) f[i++] = static_cast<float>(counts[c]);
  std::string h = host.empty() ? domain : to_lower(host);
  f[i++] = h.rfind("www.", 0) == 0 ? 1.0f : 0.0f;
  f[i++] = tables.bad.count(tld_lower) ? 1.0f : 0.0f;
  f[i++] = tables.suspicious.count(tld_lower) ? 1.0f : 0.0f;
  f[i++] = tables.normal.count(tld_lower) ? 1.0f : 0.0f;
  f[i++] = entity::is_shortener(h, tables) || entity::is_shortener(domain, tables) ? 1.0f : 0.0f;
  return v;
}

double score_domain(const model::Forest& forest, const DomainVector& v) {
  if (forest.schema_version != v.schema_version)
    throw SchemaError("forest schema '" + forest.schema_version + "' does not match '" +
                      v.schema_version + "'");
  return model::predict(forest, std::span<const float>(v.values.data(), v.values.size()));
}

MelaVector message_features(const Message& msg, const textnorm::NormalizedText& norm,
                            const entity::EntitySet& ents,
                            const cluster::ClusterMatcher& matcher,
                            const model::Forest* domain_forest,
                            const entity::Resources& res, const KeywordLists& kw) {
  if (matcher.num_clusters() != kNumClusters)
    throw SchemaError("cluster matcher size does not match message vector layout");

  MelaVector v;
  auto& f = v.values;
  const std::string& text = msg.text;
  const std::size_t length = util::count_codepoints(text);
  std::string lower_norm = to_lower(norm.normalized);

  auto pos_of = [&](const entity::Entity* e) {
    if (e == nullptr || length == 0) return static_cast<float>(PositionCode::Absent);
    return static_cast<float>(entity::position_code({e->start, e->end}, length));
  };

  // Highest-scoring URL drives every URL-derived slot.
  const entity::Entity* best_url = nullptr;
  double best_score = -1.0;
  float url_isdom = 0.0f, domain_isshort = 0.0f, domain_obfuscation = 0.0f;
  for (const entity::Entity* url : ents.of_kind(EntityKind::Url)) {
    entity::DomainParts parts;
    bool parsed = true;
    try {
      parts = entity::parse_domain(url->canonical, res);
    } catch (const DataError&) {
      parsed = false;
    }
    double score = 0.5;
    if (parsed && !parts.registrable.empty() && domain_forest != nullptr) {
      auto dv = domain_features(parts.registrable, parts.tld, res.tlds, matcher, parts.host);
      score = score_domain(*domain_forest, dv);
    }
    if (score > best_score) {
      best_score = score;
      best_url = url;
      bool shortener = parsed && entity::is_shortener(parts.host, res.tlds);
      url_isdom = parsed && !parts.registrable.empty() && !shortener ? 1.0f : 0.0f;
      domain_isshort = shortener ? 1.0f : 0.0f;
      domain_obfuscation = to_lower(url->raw) != url->canonical ? 1.0f : 0.0f;
    }
  }

  std::size_t i = 0;
  f[i++] = static_cast<float>(ents.count(EntityKind::Url));
  f[i++] = static_cast<float>(ents.count(EntityKind::Phone));
  f[i++] = static_cast<float>(ents.count(EntityKind::Email));
  f[i++] = pos_of(best_url);
  f[i++] = pos_of(ents.first(EntityKind::Phone));
  f[i++] = pos_of(ents.first(EntityKind::Email));
  f[i++] = pos_of(ents.first(EntityKind::Number));

  std::string lower_text = to_lower(text);
  bool fwd = false;
  for (const auto& marker : kw.forward_markers)
    if (lower_text.find(marker) != std::string::npos) fwd = true;
  f[i++] = fwd ? 1.0f : 0.0f;

  f[i++] = static_cast<float>(length);
  auto tokens = util::whitespace_tokens(text);
  f[i++] = static_cast<float>(tokens.size());
  f[i++] = static_cast<float>(phoneme_count(norm.normalized));

  auto counts = matcher.count(norm.normalized);
  for (std::size_t c = 0; c < kNumClusters; ++c) f[i++] = static_cast<float>(counts[c]);

  bool unsubscribe = false;
  std::vector<std::pair<std::size_t, std::string>> norm_tokens =
      util::whitespace_tokens(norm.normalized);
  for (const auto& word : kw.optout) {
    if (word == "end") continue;  // trailing imperative only
    if (contains_word(lower_norm, word)) unsubscribe = true;
  }
  if (!norm_tokens.empty() && strip_token(norm_tokens.back().second) == "end") unsubscribe = true;
  f[i++] = unsubscribe ? 1.0f : 0.0f;

  bool phone_free = false;
  for (const entity::Entity* p : ents.of_kind(EntityKind::Phone))
    if (entity::is_tollfree(p->canonical, res)) phone_free = true;
  f[i++] = phone_free ? 1.0f : 0.0f;

  bool email_free = false;
  for (const entity::Entity* e : ents.of_kind(EntityKind::Email))
    if (entity::is_freemail(e->canonical, res)) email_free = true;
  f[i++] = email_free ? 1.0f : 0.0f;

  f[i++] = best_url ? url_isdom : 0.0f;
  f[i++] = best_url ? static_cast<float>(best_score) : -1.0f;
  f[i++] = best_url ? domain_isshort : 0.0f;
  f[i++] = static_cast<float>(trigram_entropy(norm.normalized));

  auto first_non_space = std::find_if(text.begin(), text.end(), [](char c) {
    return !std::isspace(static_cast<unsigned char>(c));
  });
  auto last_non_space = std::find_if(text.rbegin(), text.rend(), [](char c) {
    return !std::isspace(static_cast<unsigned char>(c));
  });
  f[i++] = first_non_space != text.end() && is_ascii_digit(*first_non_space) ? 1.0f : 0.0f;
  f[i++] = last_non_space != text.rend() && is_ascii_digit(*last_non_space) ? 1.0f : 0.0f;

  if (norm_tokens.empty()) {
    f[i++] = 0.0f;
  } else {
    std::unordered_set<std::string> unique;
    for (const auto& [_, tok] : norm_tokens) unique.insert(to_lower(tok));
    f[i++] = static_cast<float>(unique.size()) / static_cast<float>(norm_tokens.size());
  }

  f[i++] = static_cast<float>(ents.count(EntityKind::Timex));
  f[i++] = static_cast<float>(ents.count(EntityKind::Number));
  f[i++] = static_cast<float>(ents.count(EntityKind::Currency));

  bool hello = false;
  for (std::size_t t = 0; t < std::min<std::size_t>(2, tokens.size()); ++t) {
    std::string w = strip_token(tokens[t].second);
    for (const auto& g : kw.greetings)
      if (w == g) hello = true;
  }
  f[i++] = hello ? 1.0f : 0.0f;

  bool ends_with_cta = false;
  if (length > 0) {
    for (const auto& e : ents.entities) {
      if (e.kind != EntityKind::Url && e.kind != EntityKind::Phone && e.kind != EntityKind::Email)
        continue;
      if (entity::position_code({e.start, e.end}, length) == PositionCode::End)
        ends_with_cta = true;
    }
  }
  f[i++] = ends_with_cta ? 1.0f : 0.0f;

  f[i++] = best_url ? domain_obfuscation : 0.0f;
  f[i++] = heur_tweet(text) ? 1.0f : 0.0f;
  // out-of-vocabulary variants replaced during normalization
  f[i++] = static_cast<float>(norm.substitutions.size());
  return v;
}

Featurizer::Result Featurizer::featurize(const Message& msg) const {
  Result r;
  r.entities = entity::extract_entities(msg.text, *res);
  std::vector<textnorm::Span> masked;
  for (const auto& e : r.entities.entities) masked.push_back({e.start, e.end});
  if (normalize) {
    r.norm = textnorm::normalize(msg.text, *lexicon, masked);
  } else {
    r.norm.original = msg.text;
    r.norm.normalized = util::collapse_whitespace(msg.text);
  }
  r.vector = message_features(msg, r.norm, r.entities, *matcher, domain_forest, *res, *keywords);
  return r;
}

}  // namespace smsguard::mela
