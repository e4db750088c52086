#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace smsguard::cluster {

struct ClusterSet {
  std::vector<std::pair<std::string, std::vector<std::string>>> clusters;
  std::string version;

  std::size_t size() const { return clusters.size(); }

  // Substrings >= 3 chars, unique across clusters, expected_k clusters when
  // expected_k >= 0.
  void validate(int expected_k = -1) const;

  // Sections `[name]`, one lowercase substring per line; lines with a '-'
  // prefix are pruned entries and are skipped.
  static ClusterSet load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

// Case-insensitive multi-pattern infix counter (Aho-Corasick). Immutable
// after construction.
class ClusterMatcher {
 public:
  explicit ClusterMatcher(const ClusterSet& set);

  std::size_t num_clusters() const { return num_clusters_; }

  struct CountResult {
    std::vector<int> counts;
    std::size_t positions_visited = 0;
  };

  std::vector<int> count(std::string_view text) const;
  CountResult count_with_stats(std::string_view text) const;

 private:
  struct State {
    std::vector<int> next;  // 256-wide goto (filled after failure computation)
    int dict_suffix = 0;    // nearest suffix state with output
    std::vector<int> out;   // pattern indices ending here
  };

  std::vector<State> states_;
  std::vector<int> pattern_cluster_;  // pattern index -> cluster index
  std::size_t num_clusters_ = 0;
};

struct MinedSubstring {
  std::string substring;
  int support = 0;  // number of corpus documents containing it
};

// LCS mining over the top_k most frequent non-stopword words.
std::vector<MinedSubstring> mine_substrings(const std::vector<std::string>& corpus,
                                            const std::unordered_set<std::string>& stopwords,
                                            int top_k, int min_len);

struct ClusterProposal {
  std::vector<std::string> members;
  std::vector<int> support;
  double similarity = 1.0;  // mean intra-cluster pairwise similarity
};

// Average-linkage agglomerative clustering over
// alpha * char-3-gram Jaccard + (1 - alpha) * normalized co-occurrence.
std::vector<ClusterProposal> cluster_candidates(const std::vector<MinedSubstring>& substrings,
                                                const std::vector<std::vector<double>>& cooccurrence,
                                                int target_k, double alpha = 0.5);

}  // namespace smsguard::cluster
