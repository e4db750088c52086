#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smsguard/baseline.hpp"
#include "smsguard/eval.hpp"
#include "smsguard/mela.hpp"
#include "smsguard/message.hpp"
#include "smsguard/model.hpp"
#include "smsguard/mpa.hpp"

namespace smsguard::pipeline {

// Shared immutable resources loaded from the bundled data directory.
struct Context {
  entity::Resources resources;
  textnorm::Lexicon lexicon;
  cluster::ClusterSet clusters;
  cluster::ClusterMatcher matcher;
  mela::KeywordLists keywords;
  std::unordered_set<std::string> us_networks;

  static Context load(const std::filesystem::path& data_dir);
};

enum class FeatureSet { Mela, Ngram, Sgram };

FeatureSet feature_set_from_string(const std::string& s);
std::string to_string(FeatureSet fs);

struct ExperimentConfig {
  FeatureSet features = FeatureSet::Mela;
  bool normalize = true;
  model::ForestParams forest;         // main classifier
  model::ForestParams domain_forest;  // MELA URL sub-classifier
  model::CostMatrix costs;
  int vocab_cap = 50000;
  int vocab_df_min = 2;
  int ngram_nmax = 2;
  int osb_n = 3;
  int osb_window = 4;

  ExperimentConfig() { domain_forest.n_trees = 100; }

  std::string describe() const;  // feeds the config fingerprint
};

// A trained message classifier with everything needed to score new text.
struct MessageModel {
  ExperimentConfig config;
  model::Forest forest;
  std::optional<model::Forest> domain_forest;  // MELA only, when trainable
  std::optional<baseline::VocabModel> vocab;   // baselines only

  double score(const Message& msg, const Context& ctx) const;
  int decide(const Message& msg, const Context& ctx) const;

  void save(const std::filesystem::path& base) const;
  static MessageModel load(const std::filesystem::path& base);
};

MessageModel train_message_model(const std::vector<Message>& messages,
                                 const std::vector<int>& labels,
                                 const ExperimentConfig& cfg, const Context& ctx);

// Stratified k-fold over messages; all fitted state is per-fold.
eval::Report evaluate_messages(const std::vector<Message>& messages,
                               const std::vector<int>& labels, const ExperimentConfig& cfg,
                               const Context& ctx, int k, std::uint64_t seed);

// ---- sender (MPA) pipeline ----

struct SenderVectors {
  std::vector<std::string> senders;       // first emitted window per sender
  std::vector<mpa::MpaVector> vectors;
  std::vector<std::int64_t> window_ends;  // emission timestamps, stream order
};

// Runs the aggregator over a timestamp-ordered stream and keeps each sender's
// first emitted window. The encoder is applied as-is (unknown networks -> 0).
SenderVectors collect_sender_vectors(const std::vector<Message>& stream, const Context& ctx,
                                     const mpa::NetworkEncoder& encoder,
                                     const mpa::AggregatorConfig& aggcfg,
                                     const model::Forest* domain_forest = nullptr);

mpa::NetworkEncoder build_network_encoder(const std::vector<Message>& stream);

struct SenderModel {
  model::Forest forest;
  mpa::NetworkEncoder encoder;
  model::CostMatrix costs;

  void save(const std::filesystem::path& base) const;
  static SenderModel load(const std::filesystem::path& base);
};

SenderModel train_sender_model(const std::vector<Message>& stream,
                               const std::unordered_map<std::string, int>& sender_labels,
                               const Context& ctx, const model::ForestParams& params,
                               const mpa::AggregatorConfig& aggcfg,
                               const model::CostMatrix& costs);

// Almeida-style collection: one message per line, `ham|spam<TAB>text`.
void load_sms_collection(const std::filesystem::path& path, std::vector<Message>& messages,
                         std::vector<int>& labels);

}  // namespace smsguard::pipeline
