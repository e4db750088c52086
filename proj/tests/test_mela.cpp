#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "smsguard/mela.hpp"
#include "smsguard/util.hpp"

using namespace smsguard;
using entity::EntityKind;

namespace {

const std::filesystem::path kData = SMSGUARD_DATA_DIR;

struct Fixtures {
  entity::Resources res = entity::Resources::load(kData);
  textnorm::Lexicon lexicon = textnorm::load_lexicon(kData / "lexicon.tsv");
  cluster::ClusterSet clusters = cluster::ClusterSet::load(kData / "clusters.txt");
  cluster::ClusterMatcher matcher{clusters};
  mela::KeywordLists keywords = mela::KeywordLists::load(kData / "keywords");
};

const Fixtures& fx() {
  static Fixtures f;
  return f;
}

mela::Featurizer make_featurizer(const model::Forest* domain_forest = nullptr,
                                 bool normalize = true) {
  mela::Featurizer ft;
  ft.res = &fx().res;
  ft.lexicon = &fx().lexicon;
  ft.matcher = &fx().matcher;
  ft.keywords = &fx().keywords;
  ft.domain_forest = domain_forest;
  ft.normalize = normalize;
  return ft;
}

Message make_msg(const std::string& text) {
  Message m;
  m.id = "t1";
  m.text = text;
  return m;
}

float slot(const mela::MelaVector& v, const std::string& name) {
  int i = mela::message_slot(name);
  REQUIRE(i >= 0);
  return v.values[static_cast<std::size_t>(i)];
}

float dslot(const mela::DomainVector& v, const std::string& name) {
  const auto& s = mela::domain_schema();
  auto it = std::find(s.begin(), s.end(), name);
  REQUIRE(it != s.end());
  return v.values[static_cast<std::size_t>(it - s.begin())];
}

}  // namespace

TEST_CASE("schemas have the documented shape") {
  CHECK(mela::message_schema().size() == mela::kMessageFeatureCount);
  CHECK(mela::domain_schema().size() == mela::kDomainFeatureCount);
  std::set<std::string> uniq(mela::message_schema().begin(), mela::message_schema().end());
  CHECK(uniq.size() == mela::kMessageFeatureCount);
  CHECK(mela::message_slot("NUM_OF_URLS") == 0);
  CHECK(mela::message_slot("SUBSTRING_CLUST_0") == 11);
  CHECK(mela::message_slot("SUBSTRING_CLUST_21") == 32);
  CHECK(mela::message_slot("HEUR_TWEET") == 49);
  CHECK(mela::message_slot("NUM_OF_OOV") == 50);
  CHECK(mela::message_slot("NOPE") == -1);
}

TEST_CASE("domain features for a year-bearing bad-TLD domain") {
  auto v = mela::domain_features("cash-2013.tk", "tk", fx().res.tlds, fx().matcher);
  // label under analysis is "cash-2013"
  CHECK(dslot(v, "STARTS_WITH_NUM") == 0.0f);
  CHECK(dslot(v, "ENDS_WITH_NUM") == 1.0f);
  CHECK(dslot(v, "CONTAINS_YEAR") == 1.0f);
  CHECK(dslot(v, "CONTAINS_1") == 1.0f);
  CHECK(dslot(v, "CONTAINS_ZERO") == 1.0f);
  CHECK(dslot(v, "CONTAINS_00") == 0.0f);
  CHECK(dslot(v, "DIGIT_RATIO") == doctest::Approx(4.0 / 9.0));
  CHECK(dslot(v, "HYPHEN_COUNT") == 1.0f);
  CHECK(dslot(v, "LENGTH") == 9.0f);
  CHECK(dslot(v, "WORD_COUNT") == 1.0f);
  CHECK(dslot(v, "BADTLDS") == 1.0f);
  CHECK(dslot(v, "SUSPTLDS") == 0.0f);
  CHECK(dslot(v, "NORMALTLDS") == 0.0f);
  CHECK(dslot(v, "ISSHORT") == 0.0f);
}

TEST_CASE("domain features catch doubled letters and www hosts") {
  auto v = mela::domain_features("vvebsite00.com", "com", fx().res.tlds, fx().matcher,
                                 "www.vvebsite00.com");
  CHECK(dslot(v, "CONTAINS_VV") == 1.0f);
  CHECK(dslot(v, "CONTAINS_00") == 1.0f);
  CHECK(dslot(v, "CONTAINSWWW") == 1.0f);
  CHECK(dslot(v, "NORMALTLDS") == 1.0f);

  auto s = mela::domain_features("bit.ly", "ly", fx().res.tlds, fx().matcher);
  CHECK(dslot(s, "ISSHORT") == 1.0f);
}

TEST_CASE("domain phoneme count matches vowel-group oracle") {
  auto v = mela::domain_features("example.com", "com", fx().res.tlds, fx().matcher);
  CHECK(dslot(v, "PHONEME_COUNT") == 3.0f);  // e-xa-mple
  CHECK(dslot(v, "LENGTH") == 7.0f);
}

TEST_CASE("score_domain rejects mismatched schema") {
  model::Forest forest;
  forest.schema_version = "other-schema";
  mela::DomainVector v;
  CHECK_THROWS_AS(mela::score_domain(forest, v), SchemaError);
}

TEST_CASE("counts and positions of extracted entities") {
  auto ft = make_featurizer();
  auto r = ft.featurize(make_msg("call 5551234567"));
  auto& v = r.vector;
  CHECK(slot(v, "NUM_OF_PHONES") == 1.0f);
  CHECK(slot(v, "NUM_OF_URLS") == 0.0f);
  CHECK(slot(v, "PHONE_POS") == 2.0f);  // End third
  CHECK(slot(v, "URL_POS") == -1.0f);
  CHECK(slot(v, "EMAIL_POS") == -1.0f);
  CHECK(slot(v, "ENDSWITH_CTA") == 1.0f);
  CHECK(slot(v, "DOMAIN_MELASCORE") == -1.0f);  // no URL
  CHECK(slot(v, "END_WITHNUMBER") == 1.0f);
  CHECK(slot(v, "START_WITHNUMBER") == 0.0f);
}

TEST_CASE("null domain forest scores URLs at 0.5") {
  auto ft = make_featurizer(nullptr);
  auto r = ft.featurize(make_msg("visit www.spamdomain.com today"));
  CHECK(slot(r.vector, "NUM_OF_URLS") == 1.0f);
  CHECK(slot(r.vector, "DOMAIN_MELASCORE") == 0.5f);
  CHECK(slot(r.vector, "URL_ISDOM") == 1.0f);
  CHECK(slot(r.vector, "DOMAIN_ISSHORT") == 0.0f);
}

TEST_CASE("shortened URL flips DOMAIN_ISSHORT") {
  auto ft = make_featurizer();
  auto r = ft.featurize(make_msg("check bit.ly/win now"));
  CHECK(slot(r.vector, "NUM_OF_URLS") == 1.0f);
  CHECK(slot(r.vector, "DOMAIN_ISSHORT") == 1.0f);
  CHECK(slot(r.vector, "URL_ISDOM") == 0.0f);
}

TEST_CASE("obfuscated URL raises DOMAIN_OBFUSCATION") {
  auto ft = make_featurizer();
  auto plain = ft.featurize(make_msg("visit spamdomain.com please"));
  CHECK(slot(plain.vector, "DOMAIN_OBFUSCATION") == 0.0f);
  auto truncated = ft.featurize(make_msg("visit spamdomain.com.Support me"));
  CHECK(slot(truncated.vector, "NUM_OF_URLS") == 1.0f);
  CHECK(slot(truncated.vector, "DOMAIN_OBFUSCATION") == 1.0f);
}

TEST_CASE("length, words, entropy and token ratio") {
  auto ft = make_featurizer();
  auto r = ft.featurize(make_msg("win win now"));
  auto& v = r.vector;
  CHECK(slot(v, "LENGTH") == 11.0f);
  CHECK(slot(v, "WORD_COUNT") == 3.0f);
  CHECK(slot(v, "TOKEN_RATIO") == doctest::Approx(2.0 / 3.0));

  // entropy oracle: histogram over byte trigrams of the lowercase text
  std::string lower = util::to_lower(r.norm.normalized);
  std::map<std::string, int> hist;
  int total = 0;
  for (std::size_t i = 0; i + 3 <= lower.size(); ++i) {
    hist[lower.substr(i, 3)]++;
    ++total;
  }
  double h = 0.0;
  for (auto& [_, c] : hist) {
    double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  CHECK(slot(v, "NGRAM_ENTROPY") == doctest::Approx(h));

  auto flat = ft.featurize(make_msg("aaaaaaaa"));
  CHECK(slot(flat.vector, "NGRAM_ENTROPY") == 0.0f);
  auto tiny = ft.featurize(make_msg("ab"));
  CHECK(slot(tiny.vector, "NGRAM_ENTROPY") == 0.0f);
}

TEST_CASE("keyword-driven boolean slots") {
  auto ft = make_featurizer();
  CHECK(slot(ft.featurize(make_msg("Hi there, how are you")).vector, "STARTSWITH_HELLO") == 1.0f);
  CHECK(slot(ft.featurize(make_msg("there is no greeting hi here")).vector,
             "STARTSWITH_HELLO") == 0.0f);
  CHECK(slot(ft.featurize(make_msg("FWD: check this out")).vector, "CONTAINS_FWD") == 1.0f);
  CHECK(slot(ft.featurize(make_msg("plain message")).vector, "CONTAINS_FWD") == 0.0f);
  CHECK(slot(ft.featurize(make_msg("reply STOP to unsubscribe")).vector, "UNSUBSCRIBE") == 1.0f);
  CHECK(slot(ft.featurize(make_msg("please text END")).vector, "UNSUBSCRIBE") == 1.0f);
  CHECK(slot(ft.featurize(make_msg("the end of days is near")).vector, "UNSUBSCRIBE") == 0.0f);
  CHECK(slot(ft.featurize(make_msg("come to the bus stop")).vector, "UNSUBSCRIBE") == 1.0f);
  CHECK(slot(ft.featurize(make_msg("@winner check this")).vector, "HEUR_TWEET") == 1.0f);
  CHECK(slot(ft.featurize(make_msg("mail me@gmail.com ok")).vector, "HEUR_TWEET") == 0.0f);
  CHECK(slot(ft.featurize(make_msg("call 8001234567 now")).vector, "PHONE_ISFREE") == 1.0f);
  CHECK(slot(ft.featurize(make_msg("call 5551234567 now")).vector, "PHONE_ISFREE") == 0.0f);
  CHECK(slot(ft.featurize(make_msg("mail me@gmail.com ok")).vector, "EMAIL_ISFREE") == 1.0f);
  CHECK(slot(ft.featurize(make_msg("mail me@corp.example.com")).vector, "EMAIL_ISFREE") == 0.0f);
}

TEST_CASE("cluster slots count substrings in the normalized text") {
  auto ft = make_featurizer();
  auto r = ft.featurize(make_msg("you could win a free prize"));
  auto counts = fx().matcher.count(r.norm.normalized);
  for (std::size_t c = 0; c < mela::kNumClusters; ++c) {
    CHECK(slot(r.vector, "SUBSTRING_CLUST_" + std::to_string(c)) ==
          static_cast<float>(counts[c]));
  }
  float sum = 0.0f;
  for (std::size_t c = 0; c < mela::kNumClusters; ++c)
    sum += slot(r.vector, "SUBSTRING_CLUST_" + std::to_string(c));
  CHECK(sum > 0.0f);
}

TEST_CASE("normalization consolidates contractions before clustering") {
  auto on = make_featurizer(nullptr, true);
  auto off = make_featurizer(nullptr, false);
  auto msg = make_msg("u could win a free prize 2nite");
  auto r_on = on.featurize(msg);
  auto r_off = off.featurize(msg);
  CHECK(r_on.norm.normalized != r_off.norm.normalized);
  CHECK(r_on.norm.normalized.find("you") != std::string::npos);
  CHECK(r_on.norm.normalized.find("tonight") != std::string::npos);
  CHECK(r_off.norm.normalized == msg.text);
  // raw-text slots are unaffected by the normalization switch
  CHECK(slot(r_on.vector, "LENGTH") == slot(r_off.vector, "LENGTH"));
  CHECK(slot(r_on.vector, "WORD_COUNT") == slot(r_off.vector, "WORD_COUNT"));
}

TEST_CASE("featurizer never rewrites inside entity spans") {
  auto ft = make_featurizer();
  auto r = ft.featurize(make_msg("visit 2nite.example.com 2nite"));
  CHECK(r.entities.count(EntityKind::Url) == 1);
  CHECK(r.norm.normalized.find("2nite.example.com") != std::string::npos);
  CHECK(r.norm.normalized.find("tonight") != std::string::npos);
}

TEST_CASE("empty message yields a finite vector") {
  auto ft = make_featurizer();
  for (const char* text : {"", " ", "\t\n"}) {
    auto r = ft.featurize(make_msg(text));
    for (float x : r.vector.values) CHECK(std::isfinite(x));
    CHECK(slot(r.vector, "WORD_COUNT") == 0.0f);
    CHECK(slot(r.vector, "TOKEN_RATIO") == 0.0f);
  }
}

TEST_CASE("all vectors are finite on fuzzed input") {
  auto ft = make_featurizer();
  std::mt19937_64 rng(31);
  const std::string alphabet = "abc ABC019.$@#:/-\xc2\xa3!";
  for (int iter = 0; iter < 200; ++iter) {
    std::string text;
    std::size_t len = rng() % 120;
    for (std::size_t i = 0; i < len; ++i) {
      char c = alphabet[rng() % alphabet.size()];
      // keep the two-byte pound sign intact
      if (c == '\xc2') {
        text += "\xc2\xa3";
      } else if (c != '\xa3') {
        text.push_back(c);
      }
    }
    auto r = ft.featurize(make_msg(text));
    for (float x : r.vector.values) CHECK(std::isfinite(x));
  }
}

TEST_CASE("featurize is deterministic") {
  auto ft = make_featurizer();
  auto msg = make_msg("Hi u win \xc2\xa3" "500 at www.cash-2013.tk call 08001234567 b4 5pm 2day");
  auto a = ft.featurize(msg);
  auto b = ft.featurize(msg);
  CHECK(a.vector.values == b.vector.values);
  CHECK(a.norm.normalized == b.norm.normalized);
}

TEST_CASE("trained domain forest drives DOMAIN_MELASCORE") {
  // tiny forest trained to call bad-TLD domains spam
  std::vector<std::vector<float>> rows;
  std::vector<int> labels;
  auto add = [&](const std::string& dom, const std::string& tld, int label) {
    auto dv = mela::domain_features(dom, tld, fx().res.tlds, fx().matcher);
    rows.emplace_back(dv.values.begin(), dv.values.end());
    labels.push_back(label);
  };
  for (int i = 0; i < 30; ++i) {
    add("cash-20" + std::to_string(10 + i % 10) + ".tk", "tk", 1);
    add("friend" + std::string(1, static_cast<char>('a' + i % 26)) + ".org", "org", 0);
  }
  model::ForestParams p;
  p.n_trees = 20;
  p.rng_seed = 3;
  p.n_threads = 1;
  auto forest =
      model::train(model::SampleMatrix::dense(rows), labels, p, mela::kDomainSchemaVersion);

  auto ft = make_featurizer(&forest);
  auto bad = ft.featurize(make_msg("win at cash-2014.tk now"));
  auto good = ft.featurize(make_msg("see friendb.org later"));
  CHECK(slot(bad.vector, "NUM_OF_URLS") == 1.0f);
  CHECK(slot(bad.vector, "DOMAIN_MELASCORE") > slot(good.vector, "DOMAIN_MELASCORE"));
  CHECK(slot(bad.vector, "DOMAIN_MELASCORE") > 0.5f);
}
