#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace smsguard::model {

struct ForestParams {
  int n_trees = 500;
  int max_depth = -1;  // -1 = unlimited
  int min_leaf = 1;
  int features_per_split = 0;  // 0 = floor(sqrt(d))
  bool bootstrap = true;
  std::uint64_t rng_seed = 0;
  int n_threads = 0;  // 0 = hardware concurrency
};

struct CostMatrix {
  double cost_fp = 1.0;
  double cost_fn = 1.0;
};

// Rows are either dense vectors of equal length or sparse (col, value) lists
// sorted by column with strictly positive values.
class SampleMatrix {
 public:
  static SampleMatrix dense(std::vector<std::vector<float>> rows);
  static SampleMatrix sparse(std::size_t dim,
                             std::vector<std::vector<std::pair<int, float>>> rows);

  std::size_t rows() const { return sparse_ ? srows_.size() : drows_.size(); }
  std::size_t cols() const { return dim_; }
  bool is_sparse() const { return sparse_; }

  float at(std::size_t row, int col) const;
  const std::vector<std::pair<int, float>>& sparse_row(std::size_t row) const {
    return srows_[row];
  }
  const std::vector<float>& dense_row(std::size_t row) const { return drows_[row]; }

 private:
  bool sparse_ = false;
  std::size_t dim_ = 0;
  std::vector<std::vector<float>> drows_;
  std::vector<std::vector<std::pair<int, float>>> srows_;
};

struct TreeNode {
  int feature = -1;  // -1 = leaf
  float threshold = 0.0f;
  int left = -1;
  int right = -1;
  std::int32_t counts[2] = {0, 0};  // training class counts at the node
};

struct Tree {
  std::vector<TreeNode> nodes;
};

struct Forest {
  std::vector<Tree> trees;
  ForestParams params;
  std::string schema_version;
  std::array<std::string, 2> class_labels{"ham", "spam"};
  std::size_t dimension = 0;
  double oob_accuracy = -1.0;  // -1 when bootstrap was off
};

// labels: 0 = ham, 1 = spam. Deterministic under params.rng_seed.
Forest train(const SampleMatrix& x, const std::vector<int>& labels,
             const ForestParams& params, const std::string& schema_version);

// Fraction of spam-voting trees.
double predict(const Forest& forest, std::span<const float> v);
double predict_sparse(const Forest& forest,
                      const std::vector<std::pair<int, float>>& row);

// Minimum-expected-cost threshold; ties go to spam. Returns 1 for spam.
int decide(double score, const CostMatrix& costs);

std::vector<std::uint8_t> serialize(const Forest& forest);
Forest deserialize(std::span<const std::uint8_t> bytes);
void save(const Forest& forest, const std::filesystem::path& path);
Forest load(const std::filesystem::path& path);

// Lossless textual dump for diffing.
std::string text_dump(const Forest& forest);

}  // namespace smsguard::model
