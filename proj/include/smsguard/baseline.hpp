#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace smsguard::baseline {

// Deliberately naive tokenizer used by the n-gram/OSB baselines: lowercase,
// split on non-alphanumeric except '.', which only survives between two
// letter-flanked runs of length >= 2 (so "k.a.r.s" splits but "bit.ly" holds).
std::vector<std::string> tokenize_basic(const std::string& text);

// Feature-name -> dense index map learned from a training fold only.
struct VocabModel {
  std::unordered_map<std::string, int> index;
  int cap = 50000;
  int df_min = 2;

  std::size_t size() const { return index.size(); }

  // docs: one feature-name list per training document (duplicates allowed;
  // document frequency counts each name once per doc)
  static VocabModel build(const std::vector<std::vector<std::string>>& docs,
                          int cap = 50000, int df_min = 2);

  void save(const std::filesystem::path& path) const;
  static VocabModel load(const std::filesystem::path& path);
};

// Word 1..n_max-grams joined with '_'.
std::vector<std::string> ngram_names(const std::vector<std::string>& tokens, int n_max = 2);

// Ordered token n-tuples (default triples) with bounded span: indices
// i_1 < ... < i_n, i_n - i_1 <= window, labeled by their gap pattern.
std::vector<std::string> osb_names(const std::vector<std::string>& tokens, int n = 3,
                                   int window = 4);

// Sparse count vector over the vocab, sorted by column; unseen names drop out.
std::vector<std::pair<int, float>> featurize(const std::vector<std::string>& names,
                                             const VocabModel& vocab);

std::vector<std::pair<int, float>> ngram_features(const std::vector<std::string>& tokens,
                                                  int n_max, const VocabModel& vocab);
std::vector<std::pair<int, float>> osb_features(const std::vector<std::string>& tokens, int n,
                                                int window, const VocabModel& vocab);

}  // namespace smsguard::baseline
