#include "smsguard/entity.hpp"

#include <algorithm>
#include <cctype>

#include "smsguard/util.hpp"

namespace smsguard::entity {

namespace {

using util::is_ascii_alnum;
using util::is_ascii_alpha;
using util::is_ascii_digit;
using util::to_lower;

bool is_host_char(char c) { return is_ascii_alnum(c) || c == '.' || c == '-'; }

bool is_path_char(char c) {
  if (is_ascii_alnum(c)) return true;
  return std::string_view("/_-.?=&%#+~").find(c) != std::string_view::npos;
}

std::vector<std::string> split_labels(const std::string& host) {
  std::vector<std::string> labels;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= host.size(); ++i) {
    if (i == host.size() || host[i] == '.') {
      labels.push_back(host.substr(start, i - start));
      start = i + 1;
    }
  }
  return labels;
}

bool valid_label(const std::string& label) {
  if (label.empty()) return false;
  for (char c : label)
    if (!is_ascii_alnum(c) && c != '-') return false;
  return true;
}

struct UrlCandidate {
  std::string raw;  // full candidate text before label truncation
  std::string canonical;
  std::size_t byte_start = 0;
  std::size_t byte_end = 0;
};

// Digit homoglyphs resolved inside phone candidates only.
int homoglyph_digit(char c) {
  switch (c) {
    case 'O':
    case 'o':
      return 0;
    case 'l':
    case 'I':
      return 1;
    case 'S':
      return 5;
    case 'B':
      return 8;
    default:
      return -1;
  }
}

bool is_phone_separator(char c) {
  return c == ' ' || c == '-' || c == '.' || c == '(' || c == ')' || c == '/';
}

struct RawEntity {
  EntityKind kind;
  std::string raw;
  std::string canonical;
  std::size_t byte_start;
  std::size_t byte_end;
};

class Extractor {
 public:
  Extractor(const std::string& text, const Resources& res)
      : text_(text), res_(res), taken_(text.size(), 0) {
    tokens_ = util::whitespace_tokens(text);
  }

  std::vector<RawEntity> run() {
    find_urls();
    find_emails();
    find_phones();
    find_timex();
    find_currency();
    find_numbers();
    std::sort(found_.begin(), found_.end(), [](const RawEntity& a, const RawEntity& b) {
      if (a.byte_start != b.byte_start) return a.byte_start < b.byte_start;
      return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    });
    return found_;
  }

 private:
  void claim(std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) taken_[i] = 1;
  }
  bool any_taken(std::size_t b, std::size_t e) const {
    for (std::size_t i = b; i < e; ++i)
      if (taken_[i]) return true;
    return false;
  }

  void add(EntityKind kind, std::string canonical, std::size_t b, std::size_t e, bool claim_span) {
    found_.push_back({kind, text_.substr(b, e - b), std::move(canonical), b, e});
    if (claim_span) claim(b, e);
  }

  // ---- URLs ----

  void find_urls() {
    for (std::size_t t = 0; t < tokens_.size(); ++t) {
      const auto& [off, tok] = tokens_[t];
      if (tok.find('@') != std::string::npos) continue;
      if (tok.find('.') == std::string::npos) continue;
      auto cand = parse_url_token(t);
      if (cand) {
        // keep the pre-truncation text as `raw` so obfuscation is observable
        found_.push_back({EntityKind::Url, cand->raw, cand->canonical, cand->byte_start,
                          cand->byte_end});
        claim(cand->byte_start, cand->byte_end);
      }
    }
  }

  std::optional<UrlCandidate> parse_url_token(std::size_t token_index) {
    const auto& [off, tok] = tokens_[token_index];
    // Trim wrapping punctuation.
    std::size_t b = 0, e = tok.size();
    while (b < e && std::string_view("([{'\"<").find(tok[b]) != std::string_view::npos) ++b;
    bool sentence_punct_trimmed = false;
    while (e > b) {
      char c = tok[e - 1];
      if (std::string_view(".,!?;:)]}'\">").find(c) == std::string_view::npos) break;
      if (c == '.' || c == '!' || c == '?') sentence_punct_trimmed = true;
      --e;
    }
    if (e <= b) return std::nullopt;
    std::string body = tok.substr(b, e - b);
    std::string lower = to_lower(body);

    std::string scheme;
    std::size_t host_off = 0;
    if (lower.rfind("http://", 0) == 0) {
      scheme = "http://";
      host_off = 7;
    } else if (lower.rfind("https://", 0) == 0) {
      scheme = "https://";
      host_off = 8;
    }

    std::size_t host_end = host_off;
    while (host_end < body.size() && is_host_char(body[host_end])) ++host_end;
    std::string host = body.substr(host_off, host_end - host_off);
    if (host.empty() || host.front() == '.' || host.back() == '.') return std::nullopt;
    auto labels = split_labels(host);
    if (labels.size() < 2 && scheme.empty()) return std::nullopt;
    for (const auto& l : labels)
      if (!valid_label(l)) return std::nullopt;

    bool has_www = !labels.empty() && to_lower(labels.front()) == "www";
    std::size_t kept = labels.size();
    if (scheme.empty()) {
      // Truncate trailing labels until one is a valid TLD.
      while (kept >= 2 && !res_.valid_tlds.count(to_lower(labels[kept - 1]))) --kept;
      if (kept < 2 || !res_.valid_tlds.count(to_lower(labels[kept - 1]))) return std::nullopt;
      std::size_t min_labels = has_www ? 3 : 2;
      if (kept < min_labels) return std::nullopt;
    }
    bool truncated = kept < labels.size();

    if (scheme.empty() && !has_www && kept == 2) {
      // Word-vs-domain disambiguation for bare two-label candidates.
      std::string first = to_lower(labels[0]);
      std::string tld = to_lower(labels[1]);
      if (res_.common_words.count(first)) {
        bool risky_tld = res_.tlds.bad.count(tld) || res_.tlds.suspicious.count(tld);
        bool preceded_by_ws = (b == 0);
        bool sentence_final =
            (token_index + 1 == tokens_.size()) || sentence_punct_trimmed;
        bool prev_known = false;
        if (token_index > 0) {
          std::string prev = to_lower(tokens_[token_index - 1].second);
          while (!prev.empty() && !is_ascii_alnum(prev.back())) prev.pop_back();
          std::size_t s = 0;
          while (s < prev.size() && !is_ascii_alnum(prev[s])) ++s;
          prev_known = res_.common_words.count(prev.substr(s)) > 0;
        }
        if (!(risky_tld && preceded_by_ws && !(sentence_final && prev_known)))
          return std::nullopt;
      }
    }

    // Byte extent of the kept host within the token.
    std::size_t kept_host_len = kept - 1;  // dots
    for (std::size_t i = 0; i < kept; ++i) kept_host_len += labels[i].size();
    std::size_t consumed_end = host_off + kept_host_len;
    std::string path;
    if (!truncated && host_end < body.size() && body[host_end] == '/') {
      std::size_t p = host_end;
      while (p < body.size() && is_path_char(body[p])) ++p;
      path = body.substr(host_end, p - host_end);
      consumed_end = p;
    }

    UrlCandidate cand;
    cand.raw = body.substr(0, truncated ? host_end : consumed_end);
    cand.canonical = scheme + to_lower(host.substr(0, kept_host_len)) + path;
    cand.byte_start = off + b;
    cand.byte_end = off + b + consumed_end;
    return cand;
  }

  // ---- Emails ----

  void find_emails() {
    for (std::size_t i = 0; i < text_.size(); ++i) {
      if (text_[i] != '@' || taken_[i]) continue;
      std::size_t lb = i;
      auto is_local = [](char c) {
        return is_ascii_alnum(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
      };
      while (lb > 0 && is_local(text_[lb - 1]) && !taken_[lb - 1]) --lb;
      std::size_t re = i + 1;
      while (re < text_.size() && is_host_char(text_[re]) && !taken_[re]) ++re;
      while (re > i + 1 && (text_[re - 1] == '.' || text_[re - 1] == '-')) --re;
      if (lb == i || re == i + 1) continue;
      std::string host = text_.substr(i + 1, re - i - 1);
      auto labels = split_labels(host);
      if (labels.size() < 2) continue;
      const std::string& tld = labels.back();
      if (tld.size() < 2 || !std::all_of(tld.begin(), tld.end(),
                                         [](char c) { return is_ascii_alpha(c); }))
        continue;
      add(EntityKind::Email, to_lower(text_.substr(lb, re - lb)), lb, re, true);
      // continue scanning after the email
    }
  }

  // ---- Phones ----

  void find_phones() {
    std::size_t i = 0;
    while (i < text_.size()) {
      if (!is_ascii_digit(text_[i]) || taken_[i]) {
        ++i;
        continue;
      }
      std::size_t start = i;
      std::size_t j = i;
      std::string digits;
      char prev_consumed = 0;
      std::size_t last_digit_end = i;
      while (j < text_.size() && !taken_[j]) {
        char c = text_[j];
        if (is_ascii_digit(c)) {
          digits.push_back(c);
          prev_consumed = c;
          last_digit_end = j + 1;
          ++j;
        } else if (homoglyph_digit(c) >= 0 &&
                   (is_ascii_digit(prev_consumed) || homoglyph_digit(prev_consumed) >= 0)) {
          digits.push_back(static_cast<char>('0' + homoglyph_digit(c)));
          prev_consumed = c;
          last_digit_end = j + 1;
          ++j;
        } else if (is_phone_separator(c) && prev_consumed != 0 && !is_phone_separator(prev_consumed)) {
          // single separator between digit groups
          if (c == ' ') {
            // space-joined groups must be >= 3 digits each to qualify
            std::size_t k = j + 1;
            std::size_t run = 0;
            while (k < text_.size() && is_ascii_digit(text_[k]) && !taken_[k]) {
              ++run;
              ++k;
            }
            if (run < 3) break;
          }
          prev_consumed = c;
          ++j;
        } else {
          break;
        }
      }
      if (digits.size() >= 7 && digits.size() <= 16) {
        add(EntityKind::Phone, digits, start, last_digit_end, true);
        i = last_digit_end;
      } else {
        ++i;
      }
    }
  }

  // ---- Temporal expressions ----

  void find_timex() {
    // clock times: d{1,2}[:.]dd with optional am/pm, or d{1,2}am/pm
    for (std::size_t i = 0; i < text_.size(); ++i) {
      if (!is_ascii_digit(text_[i]) || taken_[i]) continue;
      if (i > 0 && is_ascii_alnum(text_[i - 1])) continue;
      std::size_t j = i;
      while (j < text_.size() && is_ascii_digit(text_[j]) && j - i < 2) ++j;
      std::size_t end = j;
      bool has_colon = false;
      if (j + 2 < text_.size() + 1 && j < text_.size() && text_[j] == ':' &&
          j + 2 <= text_.size() && is_ascii_digit(text_[j + 1]) &&
          j + 2 <= text_.size() && is_ascii_digit(text_[j + 2])) {
        has_colon = true;
        end = j + 3;
      }
      bool has_ampm = false;
      if (end + 1 < text_.size() + 1 && end + 2 <= text_.size()) {
        std::string suffix = to_lower(text_.substr(end, 2));
        if (suffix == "am" || suffix == "pm") {
          if (end + 2 == text_.size() || !is_ascii_alnum(text_[end + 2])) {
            has_ampm = true;
            end += 2;
          }
        }
      }
      if ((has_colon || has_ampm) && !any_taken(i, end)) {
        add(EntityKind::Timex, to_lower(text_.substr(i, end - i)), i, end, true);
        i = end;
      }
    }
    // word timex
    for_each_word([&](std::size_t b, std::size_t e, const std::string& lower) {
      if (res_.timex_words.count(lower) && !any_taken(b, e))
        add(EntityKind::Timex, lower, b, e, true);
    });
  }

  // ---- Currency ----

  void find_currency() {
    for (std::size_t i = 0; i < text_.size(); ++i) {
      if (taken_[i]) continue;
      std::size_t len = 0;
      if (text_[i] == '$') len = 1;
      else if (i + 1 < text_.size() && static_cast<unsigned char>(text_[i]) == 0xC2 &&
               (static_cast<unsigned char>(text_[i + 1]) == 0xA3 ||  // £
                static_cast<unsigned char>(text_[i + 1]) == 0xA5))   // ¥
        len = 2;
      else if (i + 2 < text_.size() && static_cast<unsigned char>(text_[i]) == 0xE2 &&
               static_cast<unsigned char>(text_[i + 1]) == 0x82 &&
               static_cast<unsigned char>(text_[i + 2]) == 0xAC)  // €
        len = 3;
      if (len > 0) {
        add(EntityKind::Currency, text_.substr(i, len), i, i + len, true);
        i += len - 1;
      }
    }
    for_each_word([&](std::size_t b, std::size_t e, const std::string& lower) {
      if (res_.currency_words.count(lower) && !any_taken(b, e))
        add(EntityKind::Currency, lower, b, e, true);
    });
  }

  // ---- Standalone numbers ----

  void find_numbers() {
    std::size_t i = 0;
    while (i < text_.size()) {
      if (!is_ascii_digit(text_[i]) || taken_[i]) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < text_.size() && is_ascii_digit(text_[j]) && !taken_[j]) ++j;
      // digits glued to letters ("2nite") are lexical variants, not numbers
      bool standalone = (i == 0 || !is_ascii_alpha(text_[i - 1])) &&
                        (j == text_.size() || !is_ascii_alpha(text_[j]));
      if (standalone) add(EntityKind::Number, text_.substr(i, j - i), i, j, false);
      i = j;
    }
  }

  template <class F>
  void for_each_word(F&& f) {
    std::size_t i = 0;
    while (i < text_.size()) {
      if (!is_ascii_alpha(text_[i])) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < text_.size() && is_ascii_alpha(text_[j])) ++j;
      f(i, j, to_lower(text_.substr(i, j - i)));
      i = j;
    }
  }

  const std::string& text_;
  const Resources& res_;
  std::vector<std::uint8_t> taken_;
  std::vector<std::pair<std::size_t, std::string>> tokens_;
  std::vector<RawEntity> found_;
};

}  // namespace

const Entity* EntitySet::first(EntityKind k) const {
  for (const auto& e : entities)
    if (e.kind == k) return &e;
  return nullptr;
}

std::vector<const Entity*> EntitySet::of_kind(EntityKind k) const {
  std::vector<const Entity*> out;
  for (const auto& e : entities)
    if (e.kind == k) out.push_back(&e);
  return out;
}

EntitySet extract_entities(const std::string& text, const Resources& res) {
  EntitySet set;
  if (text.empty()) return set;
  Extractor ex(text, res);
  util::Utf8Index index(text);
  for (auto& raw : ex.run()) {
    Entity e;
    e.kind = raw.kind;
    e.raw = std::move(raw.raw);
    e.canonical = std::move(raw.canonical);
    e.start = index.cp_of_byte(raw.byte_start);
    e.end = raw.byte_end >= text.size() ? index.codepoints()
                                        : index.cp_of_byte(raw.byte_end);
    // byte_end may fall on a continuation boundary only for multibyte symbols
    // we emitted ourselves, whose ends always align to code points.
    set.counts[static_cast<std::size_t>(e.kind)]++;
    set.entities.push_back(std::move(e));
  }
  return set;
}

PositionCode position_code(std::pair<std::size_t, std::size_t> span, std::size_t text_length) {
  auto [start, end] = span;
  if (start >= end || end > text_length) throw DataError("entity span out of bounds");
  if (start * 3 < text_length) return PositionCode::Begin;
  if (end * 3 > 2 * text_length) return PositionCode::End;
  return PositionCode::Middle;
}

DomainParts parse_domain(const std::string& url_canonical, const Resources& res) {
  std::string s = url_canonical;
  auto scheme_pos = s.find("://");
  if (scheme_pos != std::string::npos) s = s.substr(scheme_pos + 3);
  for (char stop : {'/', '?', '#', ':'}) {
    auto p = s.find(stop);
    if (p != std::string::npos) s = s.substr(0, p);
  }
  std::string host = to_lower(s);
  if (host.empty() || host.front() == '.' || host.back() == '.')
    throw DataError("unparsable host in URL: " + url_canonical);
  auto labels = split_labels(host);
  for (const auto& l : labels)
    if (!valid_label(l)) throw DataError("unparsable host in URL: " + url_canonical);

  bool all_numeric = std::all_of(labels.begin(), labels.end(), [](const std::string& l) {
    return std::all_of(l.begin(), l.end(), [](char c) { return is_ascii_digit(c); });
  });
  if (all_numeric) return {host, "", ""};  // bare IP: no registrable domain
  if (labels.size() < 2) throw DataError("unparsable host in URL: " + url_canonical);

  // longest matching public suffix
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::string suffix;
    for (std::size_t j = i; j < labels.size(); ++j) {
      if (!suffix.empty()) suffix.push_back('.');
      suffix += labels[j];
    }
    if (res.public_suffixes.count(suffix)) {
      if (i == 0) return {host, host, suffix};
      std::string registrable = labels[i - 1] + "." + suffix;
      return {host, registrable, suffix};
    }
  }
  std::string tld = labels.back();
  std::string registrable = labels[labels.size() - 2] + "." + tld;
  return {host, registrable, tld};
}

bool is_shortener(const std::string& host, const TldTables& tables) {
  std::string h = to_lower(host);
  if (h.rfind("www.", 0) == 0) h = h.substr(4);
  return tables.shorteners.count(h) > 0;
}

bool is_tollfree(const std::string& phone_canonical, const Resources& res) {
  std::string d = phone_canonical;
  if (d.size() == 11 && d[0] == '1') d = d.substr(1);
  for (const auto& p : res.tollfree_prefixes)
    if (d.rfind(p, 0) == 0) return true;
  return false;
}

bool is_freemail(const std::string& email_canonical, const Resources& res) {
  auto at = email_canonical.find('@');
  if (at == std::string::npos) return false;
  return res.freemail.count(to_lower(email_canonical.substr(at + 1))) > 0;
}

namespace {
std::unordered_set<std::string> load_set(const std::filesystem::path& p) {
  auto v = util::read_list_file(p);
  return {v.begin(), v.end()};
}
}  // namespace

Resources Resources::load(const std::filesystem::path& dir) {
  Resources r;
  r.tlds.bad = load_set(dir / "tld" / "bad.txt");
  r.tlds.suspicious = load_set(dir / "tld" / "suspicious.txt");
  r.tlds.normal = load_set(dir / "tld" / "normal.txt");
  r.tlds.shorteners = load_set(dir / "tld" / "shorteners.txt");
  r.valid_tlds = load_set(dir / "tld" / "iana.txt");
  for (const auto* s : {&r.tlds.bad, &r.tlds.suspicious, &r.tlds.normal})
    r.valid_tlds.insert(s->begin(), s->end());
  r.public_suffixes = load_set(dir / "tld" / "public_suffix.txt");
  r.public_suffixes.insert(r.valid_tlds.begin(), r.valid_tlds.end());
  r.common_words = load_set(dir / "keywords" / "common_words.txt");
  r.timex_words = load_set(dir / "keywords" / "timex.txt");
  r.currency_words = load_set(dir / "keywords" / "currency.txt");
  r.freemail = load_set(dir / "keywords" / "freemail.txt");
  r.tollfree_prefixes = util::read_list_file(dir / "keywords" / "tollfree_prefixes.txt");
  return r;
}

}  // namespace smsguard::entity
