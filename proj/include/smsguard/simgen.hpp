#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "smsguard/message.hpp"
#include "smsguard/textnorm.hpp"

namespace smsguard::simgen {

enum class CtaKind { Url, Phone, Implicit };
enum class SenderStrategy { FastSingle, SlowDistributed };
enum class Targeting { RandomUniform, ListBased };

struct CampaignSpec {
  std::string name;
  CtaKind cta = CtaKind::Url;
  double obfuscation_level = 0.0;  // [0,1]
  double weight = 1.0;             // relative share of spam volume
  SenderStrategy strategy = SenderStrategy::FastSingle;
  Targeting targeting = Targeting::RandomUniform;
  int volume = 100;  // messages per spam sender in stream mode
};

// Template pools and word lists; plain data files so tests can pin them.
struct Pools {
  std::vector<std::string> url_templates;
  std::vector<std::string> phone_templates;
  std::vector<std::string> implicit_templates;
  std::vector<std::string> ham_templates;
  std::vector<std::string> names;
  std::vector<std::string> fillers;
  std::vector<std::string> time_words;
  std::vector<std::string> cta_verbs;
  std::vector<std::string> keywords;      // implicit-CTA reply words
  std::vector<std::string> domain_words;
  std::vector<std::string> spam_tlds;
  std::vector<std::string> benign_tlds;
  std::vector<std::string> us_networks;
  std::vector<std::string> other_networks;
  std::unordered_map<std::string, std::vector<std::string>> synonyms;
  // canonical -> SMS variants, inverted from the normalization lexicon
  std::unordered_map<std::string, std::vector<std::string>> contractions;

  static Pools load(const std::filesystem::path& data_dir, const textnorm::Lexicon& lexicon);
};

struct GenConfig {
  std::uint64_t seed = 1;
  int n_spam = 1000;
  int n_ham = 1000;
  double contraction_rate = 0.35;  // per-token chance of an SMS contraction
  std::int64_t start_time = 1700000000;
  std::int64_t time_step = 7;  // seconds between consecutive messages
  std::vector<CampaignSpec> campaigns;

  static GenConfig defaults();
  static GenConfig load(const std::filesystem::path& json_path);  // JSON
};

struct LabeledCorpus {
  std::vector<Message> messages;
  std::vector<int> labels;  // 0 = ham, 1 = spam, aligned with messages
};

// Deterministic under cfg.seed; spam texts are unique (collision retry).
LabeledCorpus gen_messages(const GenConfig& cfg, const Pools& pools);

struct StreamConfig {
  std::uint64_t seed = 1;
  int n_spam_senders = 50;
  int n_legit_senders = 50;
  std::int64_t start_time = 1700000000;
  std::int64_t duration = 86400;  // seconds covered by the stream
  int legit_volume = 80;          // messages per legit sender
  double contraction_rate = 0.2;
  std::vector<CampaignSpec> campaigns;
  // when >= 0: an extra implicit-CTA campaign confined to this weekly bucket
  int novel_bucket = -1;
  std::int64_t bucket_seconds = 7 * 86400;
  int novel_senders = 0;  // senders for the injected campaign

  static StreamConfig defaults();
};

struct LabeledStream {
  std::vector<Message> messages;  // globally timestamp-ordered
  std::unordered_map<std::string, int> sender_labels;  // 0 legit, 1 spammer
};

LabeledStream gen_sender_streams(const StreamConfig& cfg, const Pools& pools);

}  // namespace smsguard::simgen
