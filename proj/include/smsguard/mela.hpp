#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smsguard/cluster.hpp"
#include "smsguard/entity.hpp"
#include "smsguard/message.hpp"
#include "smsguard/model.hpp"
#include "smsguard/textnorm.hpp"

namespace smsguard::mela {

inline constexpr std::size_t kNumClusters = 22;
inline constexpr std::size_t kMessageFeatureCount = 51;
inline constexpr std::size_t kDomainFeatureCount = 39;
inline constexpr const char* kMessageSchemaVersion = "mela-msg-1";
inline constexpr const char* kDomainSchemaVersion = "mela-dom-1";

struct MelaVector {
  std::array<float, kMessageFeatureCount> values{};
  std::string schema_version = kMessageSchemaVersion;
};

struct DomainVector {
  std::array<float, kDomainFeatureCount> values{};
  std::string schema_version = kDomainSchemaVersion;
};

// slot index -> name, in fixed vector order
const std::vector<std::string>& message_schema();
const std::vector<std::string>& domain_schema();
int message_slot(const std::string& name);  // -1 if unknown

struct KeywordLists {
  std::vector<std::string> greetings;
  std::vector<std::string> optout;   // "end" is handled as trailing imperative
  std::vector<std::string> forward_markers;

  static KeywordLists load(const std::filesystem::path& keywords_dir);
};

// host is the full URL host when known (for CONTAINSWWW / shortener checks);
// falls back to the registrable domain.
DomainVector domain_features(const std::string& registrable_domain, const std::string& tld,
                             const entity::TldTables& tables,
                             const cluster::ClusterMatcher& matcher,
                             const std::string& host = "");

// Spam probability as fraction of tree votes; the forest must be trained on
// the domain schema.
double score_domain(const model::Forest& forest, const DomainVector& v);

MelaVector message_features(const Message& msg, const textnorm::NormalizedText& norm,
                            const entity::EntitySet& ents,
                            const cluster::ClusterMatcher& matcher,
                            const model::Forest* domain_forest,
                            const entity::Resources& res, const KeywordLists& kw);

// End-to-end featurization context: entity masking, normalization, cluster
// counting and domain scoring wired together in pipeline order.
struct Featurizer {
  const entity::Resources* res = nullptr;
  const textnorm::Lexicon* lexicon = nullptr;
  const cluster::ClusterMatcher* matcher = nullptr;
  const KeywordLists* keywords = nullptr;
  const model::Forest* domain_forest = nullptr;
  bool normalize = true;

  struct Result {
    MelaVector vector;
    textnorm::NormalizedText norm;
    entity::EntitySet entities;
  };

  Result featurize(const Message& msg) const;
};

}  // namespace smsguard::mela
