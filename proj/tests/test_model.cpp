#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "smsguard/model.hpp"
#include "smsguard/util.hpp"

using namespace smsguard;
using model::CostMatrix;
using model::Forest;
using model::ForestParams;
using model::SampleMatrix;

namespace {

// Two gaussian blobs, linearly separable with margin.
void make_blobs(int n_per_class, std::mt19937_64& rng,
                std::vector<std::vector<float>>& rows, std::vector<int>& labels,
                double gap = 3.0) {
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < n_per_class; ++i) {
      double cx = c == 0 ? 0.0 : gap;
      rows.push_back({static_cast<float>(cx + noise(rng)),
                      static_cast<float>(cx + noise(rng)),
                      static_cast<float>(noise(rng))});
      labels.push_back(c);
    }
  }
}

ForestParams small_params(std::uint64_t seed = 42) {
  ForestParams p;
  p.n_trees = 25;
  p.rng_seed = seed;
  p.n_threads = 2;
  return p;
}

}  // namespace

TEST_CASE("forest separates gaussian blobs") {
  std::mt19937_64 rng(1);
  std::vector<std::vector<float>> rows;
  std::vector<int> labels;
  make_blobs(120, rng, rows, labels);
  auto x = SampleMatrix::dense(rows);
  auto forest = model::train(x, labels, small_params(), "test-1");
  CHECK(forest.oob_accuracy > 0.9);

  int correct = 0;
  std::vector<std::vector<float>> test_rows;
  std::vector<int> test_labels;
  make_blobs(80, rng, test_rows, test_labels);
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    double s = model::predict(forest, test_rows[i]);
    if ((s >= 0.5 ? 1 : 0) == test_labels[i]) ++correct;
  }
  CHECK(static_cast<double>(correct) / test_rows.size() > 0.9);
}

TEST_CASE("training is deterministic for a fixed seed") {
  std::mt19937_64 rng(2);
  std::vector<std::vector<float>> rows;
  std::vector<int> labels;
  make_blobs(60, rng, rows, labels, 1.5);
  auto x = SampleMatrix::dense(rows);
  auto a = model::train(x, labels, small_params(7), "test-1");
  auto b = model::train(x, labels, small_params(7), "test-1");
  CHECK(model::text_dump(a) == model::text_dump(b));
  CHECK(a.oob_accuracy == b.oob_accuracy);

  // thread count must not change the result
  auto p1 = small_params(7);
  p1.n_threads = 1;
  auto c = model::train(x, labels, p1, "test-1");
  CHECK(model::text_dump(a) == model::text_dump(c));

  auto d = model::train(x, labels, small_params(8), "test-1");
  CHECK(model::text_dump(a) != model::text_dump(d));
}

TEST_CASE("single deep tree fits the training set exactly") {
  // without bootstrap and with unique points, one unlimited-depth tree
  // reaches pure leaves: training accuracy must be 100%
  std::vector<std::vector<float>> rows;
  std::vector<int> labels;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    rows.push_back({static_cast<float>(i), static_cast<float>(rng() % 97)});
    labels.push_back(static_cast<int>(rng() % 2));
  }
  // force both classes present
  labels[0] = 0;
  labels[1] = 1;
  ForestParams p;
  p.n_trees = 1;
  p.bootstrap = false;
  p.features_per_split = 2;
  p.rng_seed = 11;
  p.n_threads = 1;
  auto x = SampleMatrix::dense(rows);
  auto forest = model::train(x, labels, p, "test-1");
  CHECK(forest.oob_accuracy == -1.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(model::decide(model::predict(forest, rows[i]), {}) == labels[i]);
  }
}

TEST_CASE("min_leaf and max_depth bound the tree shape") {
  std::mt19937_64 rng(4);
  std::vector<std::vector<float>> rows;
  std::vector<int> labels;
  make_blobs(100, rng, rows, labels, 0.5);
  auto x = SampleMatrix::dense(rows);

  ForestParams p = small_params();
  p.n_trees = 5;
  p.max_depth = 2;
  auto shallow = model::train(x, labels, p, "test-1");
  for (const auto& tree : shallow.trees) {
    CHECK(tree.nodes.size() <= 7);  // depth-2 binary tree
  }

  p.max_depth = -1;
  p.min_leaf = 20;
  auto chunky = model::train(x, labels, p, "test-1");
  for (const auto& tree : chunky.trees) {
    for (const auto& node : tree.nodes) {
      if (node.feature == -1) CHECK(node.counts[0] + node.counts[1] >= 20);
    }
  }
}

TEST_CASE("sparse and dense training agree") {
  std::mt19937_64 rng(5);
  std::vector<std::vector<float>> drows;
  std::vector<std::vector<std::pair<int, float>>> srows;
  std::vector<int> labels;
  const int dim = 12;
  for (int i = 0; i < 150; ++i) {
    int label = static_cast<int>(rng() % 2);
    std::vector<float> row(dim, 0.0f);
    std::vector<std::pair<int, float>> srow;
    for (int j = 0; j < dim; ++j) {
      if (rng() % 3 == 0) {
        float v = static_cast<float>(1 + rng() % 5);
        if (label == 1 && j < 4) v += 3.0f;  // signal in low columns
        row[j] = v;
        srow.emplace_back(j, v);
      }
    }
    drows.push_back(std::move(row));
    srows.push_back(std::move(srow));
    labels.push_back(label);
  }
  labels[0] = 0;
  labels[1] = 1;
  auto dense = model::train(SampleMatrix::dense(drows), labels, small_params(21), "test-1");
  auto sparse = model::train(SampleMatrix::sparse(dim, srows), labels, small_params(21), "test-1");
  CHECK(model::text_dump(dense) == model::text_dump(sparse));
  for (std::size_t i = 0; i < drows.size(); ++i) {
    CHECK(model::predict(dense, drows[i]) ==
          doctest::Approx(model::predict_sparse(sparse, srows[i])));
  }
}

TEST_CASE("decide applies the cost-ratio threshold with ties to spam") {
  // threshold = cost_fp / (cost_fp + cost_fn)
  CHECK(model::decide(0.5, {1.0, 1.0}) == 1);  // tie
  CHECK(model::decide(0.49, {1.0, 1.0}) == 0);
  CHECK(model::decide(0.21, {1.0, 4.0}) == 1);  // threshold 0.2
  CHECK(model::decide(0.19, {1.0, 4.0}) == 0);
  CHECK(model::decide(0.2, {1.0, 4.0}) == 1);
  CHECK(model::decide(0.74, {3.0, 1.0}) == 0);  // threshold 0.75
  CHECK(model::decide(0.75, {3.0, 1.0}) == 1);
}

TEST_CASE("cost threshold equals minimum expected cost decision") {
  std::mt19937_64 rng(6);
  for (int iter = 0; iter < 200; ++iter) {
    CostMatrix c{1.0 + (rng() % 100) / 10.0, 1.0 + (rng() % 100) / 10.0};
    double score = (rng() % 1001) / 1000.0;
    // oracle: expected cost of flagging vs passing
    double cost_flag = (1.0 - score) * c.cost_fp;
    double cost_pass = score * c.cost_fn;
    int want = cost_flag < cost_pass ? 1 : (cost_flag > cost_pass ? 0 : 1);
    CHECK(model::decide(score, c) == want);
  }
}

TEST_CASE("serialization round-trips bit-exactly") {
  std::mt19937_64 rng(7);
  std::vector<std::vector<float>> rows;
  std::vector<int> labels;
  make_blobs(60, rng, rows, labels);
  auto forest = model::train(SampleMatrix::dense(rows), labels, small_params(), "mela-msg-1");
  auto bytes = model::serialize(forest);
  auto back = model::deserialize(bytes);
  CHECK(model::text_dump(back) == model::text_dump(forest));
  CHECK(back.schema_version == forest.schema_version);
  CHECK(back.dimension == forest.dimension);
  CHECK(back.oob_accuracy == forest.oob_accuracy);
  CHECK(back.class_labels == forest.class_labels);
  for (const auto& row : rows) {
    CHECK(model::predict(back, row) == model::predict(forest, row));
  }

  auto p = std::filesystem::temp_directory_path() / "forest_rt.bin";
  model::save(forest, p);
  auto loaded = model::load(p);
  CHECK(model::text_dump(loaded) == model::text_dump(forest));
}

TEST_CASE("deserialize rejects corrupt and incompatible input") {
  std::mt19937_64 rng(8);
  std::vector<std::vector<float>> rows;
  std::vector<int> labels;
  make_blobs(30, rng, rows, labels);
  auto p = small_params();
  p.n_trees = 3;
  auto forest = model::train(SampleMatrix::dense(rows), labels, p, "test-1");
  auto bytes = model::serialize(forest);

  auto bad_magic = bytes;
  bad_magic[0] ^= 0xff;
  CHECK_THROWS_AS(model::deserialize(bad_magic), SchemaError);

  auto truncated = bytes;
  truncated.resize(truncated.size() / 2);
  CHECK_THROWS_AS(model::deserialize(truncated), SchemaError);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(model::deserialize(trailing), SchemaError);

  // major version bump must be refused
  auto newer = bytes;
  newer[4] += 1;  // major version byte follows the 4-byte magic
  CHECK_THROWS_AS(model::deserialize(newer), SchemaError);

  CHECK_THROWS_AS(model::load("/nonexistent/forest.bin"), DataError);
}

TEST_CASE("predict rejects wrong dimension") {
  std::mt19937_64 rng(9);
  std::vector<std::vector<float>> rows;
  std::vector<int> labels;
  make_blobs(30, rng, rows, labels);
  auto forest = model::train(SampleMatrix::dense(rows), labels, small_params(), "test-1");
  std::vector<float> wrong(5, 0.0f);
  CHECK_THROWS_AS(model::predict(forest, wrong), SchemaError);
}

TEST_CASE("train validates its inputs") {
  auto x = SampleMatrix::dense({{0.0f, 1.0f}, {1.0f, 0.0f}});
  CHECK_THROWS_AS(model::train(x, {0, 0}, small_params(), "t"), DataError);   // one class
  CHECK_THROWS_AS(model::train(x, {0, 2}, small_params(), "t"), DataError);   // bad label
  CHECK_THROWS_AS(model::train(x, {0}, small_params(), "t"), DataError);      // size mismatch
  // non-finite values are rejected as soon as the matrix is built
  CHECK_THROWS_AS(SampleMatrix::dense({{0.0f, std::nanf("")}, {1.0f, 0.0f}}), DataError);
}

TEST_CASE("predictions are probabilities and monotone in spam votes") {
  std::mt19937_64 rng(10);
  std::vector<std::vector<float>> rows;
  std::vector<int> labels;
  make_blobs(80, rng, rows, labels);
  auto forest = model::train(SampleMatrix::dense(rows), labels, small_params(), "test-1");
  for (const auto& row : rows) {
    double s = model::predict(forest, row);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    // score is a vote fraction over n_trees
    double votes = s * forest.params.n_trees;
    CHECK(std::abs(votes - std::round(votes)) < 1e-9);
  }
}
