#include "smsguard/simgen.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "smsguard/util.hpp"

namespace smsguard::simgen {

namespace {

using Rng = std::mt19937_64;

std::size_t draw(Rng& rng, std::size_t n) {  // uniform in [0, n)
  if (n == 0) throw DataError("draw from empty pool");
  // rejection sampling keeps the result independent of the platform
  std::uint64_t limit = ~0ULL - (~0ULL % n);
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return static_cast<std::size_t>(v % n);
}

bool chance(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return static_cast<double>(rng() >> 11) / 9007199254740992.0 < p;
}

const std::string& pick(Rng& rng, const std::vector<std::string>& pool) {
  return pool[draw(rng, pool.size())];
}

std::string digits(Rng& rng, int count) {
  std::string out;
  for (int i = 0; i < count; ++i) out.push_back(static_cast<char>('0' + draw(rng, 10)));
  return out;
}

}  // namespace

Pools Pools::load(const std::filesystem::path& data_dir, const textnorm::Lexicon& lexicon) {
  auto sim = data_dir / "simgen";
  Pools p;
  p.url_templates = util::read_lines(sim / "templates_url.txt");
  p.phone_templates = util::read_lines(sim / "templates_phone.txt");
  p.implicit_templates = util::read_lines(sim / "templates_implicit.txt");
  p.ham_templates = util::read_lines(sim / "templates_ham.txt");
  for (auto* v : {&p.url_templates, &p.phone_templates, &p.implicit_templates, &p.ham_templates}) {
    std::erase_if(*v, [](const std::string& s) { return s.empty() || s[0] == '#'; });
    if (v->empty()) throw DataError("empty template pool under " + sim.string());
  }
  p.names = util::read_list_file(sim / "names.txt");
  p.fillers = util::read_list_file(sim / "fillers.txt");
  p.time_words = util::read_list_file(sim / "time_words.txt");
  p.cta_verbs = util::read_list_file(sim / "cta_verbs.txt");
  p.keywords = util::read_list_file(sim / "keywords.txt");
  p.domain_words = util::read_list_file(sim / "domain_words.txt");
  p.spam_tlds = util::read_list_file(sim / "spam_tlds.txt");
  p.benign_tlds = util::read_list_file(sim / "benign_tlds.txt");
  p.us_networks = util::read_list_file(data_dir / "networks" / "us_networks.txt");
  p.other_networks = util::read_list_file(data_dir / "networks" / "other_networks.txt");

  for (const auto& line : util::read_lines(sim / "synonyms.txt")) {
    if (line.empty() || line[0] == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) throw DataError("malformed synonym line: " + line);
    std::string word = line.substr(0, colon);
    std::vector<std::string> forms;
    std::istringstream rest(line.substr(colon + 1));
    std::string form;
    while (std::getline(rest, form, '|')) {
      while (!form.empty() && form.front() == ' ') form.erase(form.begin());
      while (!form.empty() && form.back() == ' ') form.pop_back();
      if (!form.empty()) forms.push_back(form);
    }
    if (forms.empty()) throw DataError("synonym entry without forms: " + word);
    p.synonyms.emplace(std::move(word), std::move(forms));
  }

  for (const auto& [variant, canonical] : lexicon.entries)
    p.contractions[canonical].push_back(variant);
  for (auto& [_, variants] : p.contractions) std::sort(variants.begin(), variants.end());
  return p;
}

namespace {

CtaKind cta_from_string(const std::string& s) {
  if (s == "url") return CtaKind::Url;
  if (s == "phone") return CtaKind::Phone;
  if (s == "implicit") return CtaKind::Implicit;
  throw DataError("unknown cta kind: " + s);
}

SenderStrategy strategy_from_string(const std::string& s) {
  if (s == "fast_single") return SenderStrategy::FastSingle;
  if (s == "slow_distributed") return SenderStrategy::SlowDistributed;
  throw DataError("unknown sender strategy: " + s);
}

Targeting targeting_from_string(const std::string& s) {
  if (s == "random_uniform") return Targeting::RandomUniform;
  if (s == "list_based") return Targeting::ListBased;
  throw DataError("unknown targeting: " + s);
}

std::vector<CampaignSpec> default_campaigns() {
  std::vector<CampaignSpec> cs;
  CampaignSpec a{"prize-url", CtaKind::Url, 0.5, 0.4, SenderStrategy::FastSingle,
                 Targeting::RandomUniform, 120};
  CampaignSpec b{"prize-phone", CtaKind::Phone, 0.5, 0.3, SenderStrategy::FastSingle,
                 Targeting::RandomUniform, 120};
  CampaignSpec c{"chat-implicit", CtaKind::Implicit, 0.3, 0.1, SenderStrategy::SlowDistributed,
                 Targeting::ListBased, 60};
  CampaignSpec d{"phish-url", CtaKind::Url, 0.8, 0.2, SenderStrategy::SlowDistributed,
                 Targeting::ListBased, 60};
  return {a, b, c, d};
}

void validate_config(const GenConfig& cfg) {
  if (cfg.n_spam < 0 || cfg.n_ham < 0) throw DataError("negative corpus sizes");
  if (cfg.n_spam > 0 && cfg.campaigns.empty())
    throw DataError("spam requested but no campaigns configured");
  for (const auto& c : cfg.campaigns) {
    if (c.weight < 0.0) throw DataError("campaign '" + c.name + "' has negative weight");
    if (c.volume <= 0) throw DataError("campaign '" + c.name + "' has non-positive volume");
    if (c.obfuscation_level < 0.0 || c.obfuscation_level > 1.0)
      throw DataError("campaign '" + c.name + "' obfuscation level outside [0,1]");
  }
}

}  // namespace

GenConfig GenConfig::defaults() {
  GenConfig cfg;
  cfg.campaigns = default_campaigns();
  return cfg;
}

GenConfig GenConfig::load(const std::filesystem::path& json_path) {
  nlohmann::json j;
  try {
    std::ifstream in(json_path);
    if (!in) throw DataError("cannot open " + json_path.string());
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad generator config " + json_path.string() + ": " + e.what());
  }
  GenConfig cfg;
  try {
    cfg.seed = j.value("seed", cfg.seed);
    cfg.n_spam = j.value("n_spam", cfg.n_spam);
    cfg.n_ham = j.value("n_ham", cfg.n_ham);
    cfg.contraction_rate = j.value("contraction_rate", cfg.contraction_rate);
    cfg.start_time = j.value("start_time", cfg.start_time);
    cfg.time_step = j.value("time_step", cfg.time_step);
    for (const auto& cj : j.value("campaigns", nlohmann::json::array())) {
      CampaignSpec c;
      c.name = cj.at("name").get<std::string>();
      c.cta = cta_from_string(cj.value("cta", "url"));
      c.obfuscation_level = cj.value("obfuscation_level", 0.0);
      c.weight = cj.value("weight", 1.0);
      c.strategy = strategy_from_string(cj.value("strategy", "fast_single"));
      c.targeting = targeting_from_string(cj.value("targeting", "random_uniform"));
      c.volume = cj.value("volume", 100);
      cfg.campaigns.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad generator config " + json_path.string() + ": " + e.what());
  }
  validate_config(cfg);
  return cfg;
}

namespace {

// Everything needed to fill one template.
struct Filler {
  const Pools& pools;
  Rng& rng;
  double obfuscation = 0.0;
  double contraction_rate = 0.0;
  int transforms = 0;          // obfuscation transform log
  std::string url{};           // last generated URL / phone, for forcing
  std::string phone{};

  std::string spam_domain() {
    std::string d = pick(rng, pools.domain_words);
    if (chance(rng, 0.7)) d += pick(rng, pools.domain_words);
    // keep letters on both sides of the final dot so the naive tokenizer does
    // not carve off the TLD
    if (chance(rng, 0.6)) d += digits(rng, 2 + static_cast<int>(draw(rng, 3))) +
                               pick(rng, pools.domain_words);
    return d + "." + pick(rng, pools.spam_tlds);
  }

  std::string benign_domain() {
    std::string d = pick(rng, pools.domain_words) + pick(rng, pools.domain_words);
    return d + "." + pick(rng, pools.benign_tlds);
  }

  std::string gen_url(bool spam) {
    std::string u = spam ? spam_domain() : benign_domain();
    if (chance(rng, 0.3)) u = "www." + u;
    url = u;
    return u;
  }

  std::string gen_phone() {
    static const char* tollfree[] = {"800", "888", "877", "866"};
    std::string p = chance(rng, 0.5) ? tollfree[draw(rng, 4)]
                                     : std::to_string(2 + draw(rng, 8)) + digits(rng, 2);
    p += digits(rng, 7);
    phone = p;
    return p;
  }

  std::string amount() {
    std::string value = std::to_string((1 + draw(rng, 50)) * 100);
    switch (draw(rng, 3)) {
      case 0: return "$" + value;
      case 1: return "\xc2\xa3" + value;
      default: return value + " dollars";
    }
  }

  std::string slot(const std::string& name) {
    if (name == "name") return pick(rng, pools.names);
    if (name == "url") return gen_url(true);
    if (name == "benign_url") return gen_url(false);
    if (name == "phone") return gen_phone();
    if (name == "amount") return amount();
    if (name == "time") return pick(rng, pools.time_words);
    if (name == "cta") return pick(rng, pools.cta_verbs);
    if (name == "keyword") return pick(rng, pools.keywords);
    if (name == "digits") return digits(rng, 2 + static_cast<int>(draw(rng, 3)));
    if (name == "noise") {
      // junk reply code: an all-digit token too random to ever reach a
      // vocabulary, but visible to entity extraction as a bare number
      return digits(rng, 5 + static_cast<int>(draw(rng, 2)));
    }
    if (name == "filler") {
      std::string out = pick(rng, pools.fillers);
      if (chance(rng, 0.4)) out += " " + pick(rng, pools.fillers);
      return out;
    }
    if (name.rfind("syn:", 0) == 0) {
      auto it = pools.synonyms.find(name.substr(4));
      if (it == pools.synonyms.end()) return name.substr(4);
      return it->second[draw(rng, it->second.size())];
    }
    throw DataError("unknown template slot {" + name + "}");
  }

  std::string fill(const std::string& tpl) {
    url.clear();
    phone.clear();
    std::string out;
    std::istringstream in(tpl);
    std::string tok;
    bool first = true;
    while (in >> tok) {
      std::string piece;
      if (tok.size() >= 3 && tok.front() == '{' && tok.back() == '}') {
        piece = slot(tok.substr(1, tok.size() - 2));
      } else {
        piece = tok;
      }
      if (!first) out.push_back(' ');
      out += piece;
      first = false;
    }
    return out;
  }

  // replace canonical words with SMS contractions
  std::string contract(const std::string& text) {
    std::istringstream in(text);
    std::string tok, out;
    bool first = true;
    while (in >> tok) {
      auto it = pools.contractions.find(tok);
      if (it != pools.contractions.end() && chance(rng, contraction_rate))
        tok = it->second[draw(rng, it->second.size())];
      if (!first) out.push_back(' ');
      out += tok;
      first = false;
    }
    return out;
  }

  std::string uppercase_trick(std::string s) {
    bool changed = false;
    for (char& c : s)
      if (c >= 'a' && c <= 'z' && chance(rng, 0.4)) {
        c = static_cast<char>(c - 'a' + 'A');
        changed = true;
      }
    if (!changed && !s.empty()) s[0] = static_cast<char>(std::toupper(s[0]));
    return s;
  }

  std::string homoglyph_trick(std::string s, double per_digit) {
    for (char& c : s) {
      if (!chance(rng, per_digit)) continue;
      if (c == '0') c = 'O';
      else if (c == '1') c = 'l';
      else if (c == '5') c = 'S';
      else if (c == '8') c = 'B';
    }
    return s;
  }

  // Free-form character noise: leet substitutions plus a doubled letter give a
  // variant space large enough that most forms occur once in a whole corpus.
  std::string mutate_word(std::string w) {
    bool changed = false;
    for (char& c : w) {
      if (!chance(rng, 0.45)) continue;
      char repl = c;
      switch (c) {
        case 'a': repl = '4'; break;
        case 'e': repl = '3'; break;
        case 'i': repl = '1'; break;
        case 'o': repl = '0'; break;
        case 's': repl = '5'; break;
        case 't': repl = '7'; break;
        default: break;
      }
      if (repl != c) {
        c = repl;
        changed = true;
      }
    }
    if (chance(rng, 0.4) || !changed) {
      std::size_t at = draw(rng, w.size());
      w.insert(w.begin() + static_cast<std::ptrdiff_t>(at), w[at]);
    }
    return w;
  }

  // Disguise content words: a lexicon-known texting variant when one exists
  // (normalization can undo those), free-form noise otherwise.
  std::string disguise_words(const std::string& text) {
    std::istringstream in(text);
    std::string tok, out;
    bool first = true;
    while (in >> tok) {
      bool plain_word = tok.size() >= 4 &&
                        std::all_of(tok.begin(), tok.end(), util::is_ascii_alpha);
      if (plain_word && chance(rng, obfuscation * 0.6)) {
        auto it = pools.contractions.find(tok);
        if (it != pools.contractions.end() && chance(rng, 0.85))
          tok = it->second[draw(rng, it->second.size())];
        else
          tok = mutate_word(tok);
        ++transforms;
      }
      if (!first) out.push_back(' ');
      out += tok;
      first = false;
    }
    return out;
  }

  void replace_once(std::string& text, const std::string& from, const std::string& to) {
    auto pos = text.find(from);
    if (pos == std::string::npos || from == to) return;
    text.replace(pos, from.size(), to);
    ++transforms;
  }

  std::string obfuscate(std::string text) {
    text = disguise_words(text);
    if (!url.empty() && chance(rng, obfuscation)) {
      if (chance(rng, 0.5)) {
        replace_once(text, url, uppercase_trick(url));
      } else {
        std::string tail = pick(rng, pools.fillers);
        tail[0] = static_cast<char>(std::toupper(tail[0]));
        replace_once(text, url, url + "." + tail);
      }
    }
    if (!phone.empty() && chance(rng, obfuscation)) {
      std::string o = homoglyph_trick(phone, 0.5);
      replace_once(text, phone, o);
    }
    if (chance(rng, obfuscation * 0.3)) {
      // split one long plain word in two
      std::vector<std::pair<std::size_t, std::string>> toks = util::whitespace_tokens(text);
      std::vector<std::size_t> eligible;
      for (std::size_t t = 0; t < toks.size(); ++t) {
        const std::string& w = toks[t].second;
        if (w.size() >= 6 && std::all_of(w.begin(), w.end(), util::is_ascii_alpha))
          eligible.push_back(t);
      }
      if (!eligible.empty()) {
        auto& [off, w] = toks[eligible[draw(rng, eligible.size())]];
        std::size_t cut = 2 + draw(rng, w.size() - 4);
        text = text.substr(0, off) + w.substr(0, cut) + " " + w.substr(cut) +
               text.substr(off + w.size());
        ++transforms;
      }
    }
    if (obfuscation >= 0.999 && transforms == 0) {
      if (!url.empty())
        replace_once(text, url, uppercase_trick(url));
      else if (!phone.empty())
        replace_once(text, phone, homoglyph_trick(phone, 1.0));
    }
    return text;
  }
};

const std::vector<std::string>& campaign_templates(const Pools& pools, CtaKind cta) {
  switch (cta) {
    case CtaKind::Url: return pools.url_templates;
    case CtaKind::Phone: return pools.phone_templates;
    case CtaKind::Implicit: return pools.implicit_templates;
  }
  throw DataError("unreachable cta kind");
}

std::size_t pick_campaign(Rng& rng, const std::vector<CampaignSpec>& cs) {
  double total = 0.0;
  for (const auto& c : cs) total += c.weight;
  if (total <= 0.0) throw DataError("campaign weights sum to zero");
  double x = (static_cast<double>(rng() >> 11) / 9007199254740992.0) * total;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    x -= cs[i].weight;
    if (x <= 0.0) return i;
  }
  return cs.size() - 1;
}

// Ham runs through the same typo channel at a fixed low level: real personal
// texts are messy too, and perfectly clean ham would make every garbled word
// a spam giveaway.
constexpr double kHamTypoLevel = 0.3;

// Implicit-CTA spam and a slice of benign banter come from one shared
// construction: a short run of everyday words with an arranged word pair
// dropped in. Spam keeps the pair within the span a gap-tolerant order model
// can see and carries one junk token; ham scatters the same pair far apart.
// Word choice, counts, and adjacency statistics match between the classes by
// construction, so only token order (plus the junk token's character shape)
// separates them.
constexpr std::pair<const char*, const char*> kSaladPairs[] = {
    {"quiz", "tonight"}, {"tickets", "game"}, {"coffee", "later"}, {"movie", "book"}};

// Stock two-word chunks: banter is assembled from these so its n-gram
// footprint recurs corpus-wide and survives the vocabulary frequency floor
// instead of dissolving into one-off token combinations.
constexpr const char* kSaladChunks[] = {"see you", "back in",  "the usual", "for us",
                                        "me about", "still in", "you can",  "i text",
                                        "about the", "us first", "in there", "not yet",
                                        "so", "then", "right", "too"};
// single-word chunks double as the word between a spam pair, so the pair's
// neighbours look like ordinary chunk boundaries on both sides
constexpr const char* kSaladSingles[] = {"so", "then", "right", "too"};

std::string salad_text(const Pools& pools, Rng& rng, bool spam) {
  std::size_t n_chunks = 4 + draw(rng, 2);
  std::vector<std::string> parts(n_chunks);
  for (auto& c : parts) c = kSaladChunks[draw(rng, std::size(kSaladChunks))];
  const auto& pr = kSaladPairs[draw(rng, std::size(kSaladPairs))];
  // Both variants put the same connector block right after the pair's lead
  // word, so word adjacency carries no class signal; only the distance to the
  // trailing word differs.
  constexpr const char* kConnectors[] = {"me", "you", "in", "still"};
  const char* conn = kConnectors[draw(rng, std::size(kConnectors))];
  std::string lead = std::string(pr.first) + " " + conn;
  // The pair words' immediate neighbours are single-word chunks in both
  // variants, and both variants carry two singles around the pair in total,
  // so adjacency and word counts stay class-neutral.
  const char* s1 = kSaladSingles[draw(rng, std::size(kSaladSingles))];
  const char* s2 = kSaladSingles[draw(rng, std::size(kSaladSingles))];
  if (spam) {
    // trailing word lands two tokens after the lead word: inside the span a
    // gap-tolerant order model can see
    std::size_t at = draw(rng, n_chunks + 1);
    parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(at),
                 lead + " " + s1 + " " + pr.second);
    parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(draw(rng, parts.size() + 1)), s2);
    Filler f{pools, rng, 0.0, 0.0};
    parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(draw(rng, parts.size() + 1)),
                 f.slot("noise"));
  } else {
    // same pieces, but at least two chunks (four-plus tokens) sit between the
    // pair words
    std::size_t a = draw(rng, n_chunks - 1);
    std::size_t b = a + 2 + draw(rng, n_chunks - a - 1);
    parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(b), std::string(s2) + " " + pr.second);
    parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(a), lead + " " + s1);
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += parts[i];
  }
  return out;
}

std::string spam_text(const CampaignSpec& campaign, const Pools& pools, Rng& rng,
                      double contraction_rate, int* transforms = nullptr) {
  if (campaign.cta == CtaKind::Implicit) {
    // the word channel is the exact one ham goes through, so token quality
    // carries no class signal either
    Filler filler{pools, rng, kHamTypoLevel, contraction_rate};
    std::string text = filler.disguise_words(salad_text(pools, rng, true));
    if (transforms != nullptr) *transforms = filler.transforms;
    return text;
  }
  Filler filler{pools, rng, campaign.obfuscation_level, contraction_rate};
  const auto& templates = campaign_templates(pools, campaign.cta);
  std::string text;
  // A share of URL/phone spam mimics an everyday message and only the
  // appended call to action gives it away.
  bool mimic = campaign.cta != CtaKind::Implicit && chance(rng, 0.35);
  if (mimic) {
    text = filler.fill(pools.ham_templates[draw(rng, pools.ham_templates.size())]);
    if (campaign.cta == CtaKind::Url) {
      // trailing word keeps a bare common-word domain out of sentence-final
      // position, where the extractor's word-vs-domain rule would drop it
      text += " " + filler.gen_url(true) + " " + pick(rng, pools.time_words);
    } else {
      text += " call " + filler.gen_phone();
      if (chance(rng, 0.5)) text += " " + pick(rng, pools.time_words);
    }
  } else {
    text = filler.fill(templates[draw(rng, templates.size())]);
  }
  text = filler.contract(text);
  text = filler.obfuscate(text);
  if (transforms != nullptr) *transforms = filler.transforms;
  return text;
}

std::string ham_text(const Pools& pools, Rng& rng, double contraction_rate) {
  Filler filler{pools, rng, kHamTypoLevel, contraction_rate};
  // salad banter is left pristine: its words live in the clean chunk
  // inventory, so the typo channel would only blur the token-quality signal
  // the spam counterpart carries
  if (chance(rng, 0.1)) return salad_text(pools, rng, false);
  std::string text = filler.fill(pools.ham_templates[draw(rng, pools.ham_templates.size())]);
  text = filler.contract(text);
  return filler.disguise_words(text);
}

std::string random_sender(Rng& rng) { return std::to_string(2 + draw(rng, 8)) + digits(rng, 9); }

}  // namespace

LabeledCorpus gen_messages(const GenConfig& cfg, const Pools& pools) {
  validate_config(cfg);
  Rng rng(cfg.seed);

  // interleave classes along the timeline
  std::vector<int> order(static_cast<std::size_t>(cfg.n_spam + cfg.n_ham));
  std::fill(order.begin(), order.begin() + cfg.n_spam, 1);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[draw(rng, i)]);

  LabeledCorpus corpus;
  corpus.messages.reserve(order.size());
  corpus.labels.reserve(order.size());
  std::unordered_set<std::string> spam_texts;

  for (std::size_t i = 0; i < order.size(); ++i) {
    Message m;
    m.id = "m" + std::to_string(1000000 + i);
    m.timestamp = cfg.start_time + static_cast<std::int64_t>(i) * cfg.time_step;
    m.sender = random_sender(rng);
    m.recipient = random_sender(rng);
    bool spam = order[i] == 1;
    const auto& orig_pool = (spam && chance(rng, 0.6)) ? pools.other_networks : pools.us_networks;
    m.orig_network = pick(rng, orig_pool);
    m.dest_network = pick(rng, pools.us_networks);

    if (spam) {
      const CampaignSpec& campaign = cfg.campaigns[pick_campaign(rng, cfg.campaigns)];
      std::string text;
      bool unique = false;
      for (int attempt = 0; attempt < 100 && !unique; ++attempt) {
        text = spam_text(campaign, pools, rng, cfg.contraction_rate);
        unique = spam_texts.insert(text).second;
      }
      if (!unique)
        throw DataError("could not generate a unique spam text for campaign " + campaign.name);
      m.text = text;
    } else {
      m.text = ham_text(pools, rng, cfg.contraction_rate);
    }
    corpus.messages.push_back(std::move(m));
    corpus.labels.push_back(spam ? 1 : 0);
  }
  return corpus;
}

StreamConfig StreamConfig::defaults() {
  StreamConfig cfg;
  cfg.campaigns = default_campaigns();
  return cfg;
}

LabeledStream gen_sender_streams(const StreamConfig& cfg, const Pools& pools) {
  if (cfg.n_spam_senders < 0 || cfg.n_legit_senders < 0 || cfg.duration <= 0)
    throw DataError("invalid stream configuration");
  if (cfg.n_spam_senders > 0 && cfg.campaigns.empty())
    throw DataError("spam senders requested but no campaigns configured");

  Rng rng(cfg.seed);
  LabeledStream stream;
  auto push = [&](Message m, int label) {
    stream.sender_labels[m.sender] = label;
    stream.messages.push_back(std::move(m));
  };

  // legit senders: small contact set, varied conversational texts, steady
  // weekly volume across the whole duration
  const double weeks = std::max(1.0, static_cast<double>(cfg.duration) / 604800.0);
  for (int s = 0; s < cfg.n_legit_senders; ++s) {
    std::string sender = random_sender(rng);
    int contacts_n = 3 + static_cast<int>(draw(rng, 6));
    std::vector<std::string> contacts;
    for (int c = 0; c < contacts_n; ++c) contacts.push_back(random_sender(rng));
    std::string orig = pick(rng, pools.us_networks);
    int total = static_cast<int>(cfg.legit_volume * weeks);
    std::vector<std::int64_t> times;
    for (int k = 0; k < total; ++k)
      times.push_back(cfg.start_time +
                      static_cast<std::int64_t>(draw(rng, static_cast<std::size_t>(cfg.duration))));
    std::sort(times.begin(), times.end());
    for (auto ts : times) {
      Message m;
      m.timestamp = ts;
      m.sender = sender;
      m.recipient = contacts[draw(rng, contacts.size())];
      m.orig_network = orig;
      m.dest_network = pick(rng, pools.us_networks);
      m.text = ham_text(pools, rng, cfg.contraction_rate);
      push(std::move(m), 0);
    }
  }

  // campaign target list shared by list_based spam senders
  std::vector<std::string> target_list;
  {
    // the shared block reaches into the low digits so per-position recipient
    // entropy drops for list-based senders
    std::string prefix = std::to_string(2 + draw(rng, 8)) + digits(rng, 5);
    for (int t = 0; t < 300; ++t) target_list.push_back(prefix + digits(rng, 4));
  }

  auto spam_sender = [&](const CampaignSpec& campaign, std::int64_t active_from,
                         std::int64_t active_span) {
    std::string sender = random_sender(rng);
    bool fast = campaign.strategy == SenderStrategy::FastSingle;
    std::string orig = chance(rng, 0.7) ? pick(rng, pools.other_networks)
                                        : pick(rng, pools.us_networks);
    std::string base_text = spam_text(campaign, pools, rng, cfg.contraction_rate);
    std::int64_t ts =
        active_from + static_cast<std::int64_t>(draw(rng, static_cast<std::size_t>(
                                                             std::max<std::int64_t>(
                                                                 active_span / 4, 1))));
    for (int k = 0; k < campaign.volume; ++k) {
      Message m;
      m.timestamp = ts;
      m.sender = sender;
      m.recipient = campaign.targeting == Targeting::RandomUniform
                        ? random_sender(rng)
                        : target_list[draw(rng, target_list.size())];
      m.orig_network = orig;
      m.dest_network = pick(rng, pools.us_networks);
      m.text = chance(rng, 0.1) ? spam_text(campaign, pools, rng, cfg.contraction_rate)
                                : base_text;
      push(std::move(m), 1);
      std::int64_t gap = fast ? 1 + static_cast<std::int64_t>(draw(rng, 3))
                              : std::max<std::int64_t>(
                                    1, active_span / (2 * std::max(campaign.volume, 1))) +
                                    static_cast<std::int64_t>(draw(rng, 120));
      ts += gap;
    }
  };

  for (int s = 0; s < cfg.n_spam_senders; ++s) {
    const CampaignSpec& campaign = cfg.campaigns[pick_campaign(rng, cfg.campaigns)];
    // activity fits a sub-week burst placed anywhere in the stream
    std::int64_t burst = std::min<std::int64_t>(cfg.duration, 6 * 86400);
    std::int64_t latest_start = std::max<std::int64_t>(cfg.duration - burst, 1);
    std::int64_t start =
        cfg.start_time + static_cast<std::int64_t>(draw(rng, static_cast<std::size_t>(latest_start)));
    spam_sender(campaign, start, burst);
  }

  // optional novel implicit-CTA campaign confined to one weekly bucket
  if (cfg.novel_bucket >= 0 && cfg.novel_senders > 0) {
    CampaignSpec novel;
    novel.name = "novel-implicit";
    novel.cta = CtaKind::Implicit;
    novel.obfuscation_level = 0.0;
    novel.strategy = SenderStrategy::SlowDistributed;
    novel.targeting = Targeting::ListBased;
    novel.volume = 70;
    std::int64_t bucket_start =
        cfg.start_time + static_cast<std::int64_t>(cfg.novel_bucket) * cfg.bucket_seconds;
    for (int s = 0; s < cfg.novel_senders; ++s) {
      // legit-looking metadata: US network, a small contact-style recipient
      // set and per-message text variation, so only drift monitoring sees it
      std::string sender = random_sender(rng);
      std::string orig = pick(rng, pools.us_networks);
      std::vector<std::string> contacts;
      for (int c = 0; c < 6; ++c) contacts.push_back(target_list[draw(rng, target_list.size())]);
      std::int64_t ts = bucket_start + static_cast<std::int64_t>(draw(rng, 86400));
      for (int k = 0; k < novel.volume; ++k) {
        Message m;
        m.timestamp = ts;
        m.sender = sender;
        m.recipient = contacts[draw(rng, contacts.size())];
        m.orig_network = orig;
        m.dest_network = pick(rng, pools.us_networks);
        m.text = spam_text(novel, pools, rng, cfg.contraction_rate);
        push(std::move(m), 1);
        ts += 3600 + static_cast<std::int64_t>(draw(rng, 1800));  // ~5 days of activity
      }
    }
  }

  std::sort(stream.messages.begin(), stream.messages.end(),
            [](const Message& a, const Message& b) {
              if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
              if (a.sender != b.sender) return a.sender < b.sender;
              return a.text < b.text;
            });
  for (std::size_t i = 0; i < stream.messages.size(); ++i)
    stream.messages[i].id = "s" + std::to_string(1000000 + i);
  return stream;
}

}  // namespace smsguard::simgen
