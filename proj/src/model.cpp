#include "smsguard/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "smsguard/util.hpp"

namespace smsguard::model {

SampleMatrix SampleMatrix::dense(std::vector<std::vector<float>> rows) {
  SampleMatrix m;
  m.sparse_ = false;
  m.drows_ = std::move(rows);
  m.dim_ = m.drows_.empty() ? 0 : m.drows_.front().size();
  for (const auto& r : m.drows_) {
    if (r.size() != m.dim_) throw DataError("inconsistent vector dimensions");
    for (float v : r)
      if (!std::isfinite(v)) throw DataError("non-finite feature value");
  }
  return m;
}

SampleMatrix SampleMatrix::sparse(std::size_t dim,
                                  std::vector<std::vector<std::pair<int, float>>> rows) {
  SampleMatrix m;
  m.sparse_ = true;
  m.dim_ = dim;
  m.srows_ = std::move(rows);
  for (const auto& r : m.srows_) {
    for (auto& [c, v] : r) {
      if (c < 0 || static_cast<std::size_t>(c) >= dim)
        throw DataError("sparse column index out of range");
      if (!std::isfinite(v)) throw DataError("non-finite feature value");
    }
  }
  return m;
}

float SampleMatrix::at(std::size_t row, int col) const {
  if (!sparse_) return drows_[row][static_cast<std::size_t>(col)];
  const auto& r = srows_[row];
  auto it = std::lower_bound(r.begin(), r.end(), col,
                             [](const std::pair<int, float>& p, int c) { return p.first < c; });
  return (it != r.end() && it->first == col) ? it->second : 0.0f;
}

namespace {

struct ValueGroup {
  float value;
  std::int64_t counts[2];
};

struct SplitResult {
  bool found = false;
  float threshold = 0.0f;
  double gain = 0.0;
  std::int64_t left_n = 0;
};

// implementation-independent bounded draw, keeps trained models portable
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                        std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

double gini(std::int64_t ham, std::int64_t spam) {
  std::int64_t n = ham + spam;
  if (n == 0) return 0.0;
  double ph = static_cast<double>(ham) / static_cast<double>(n);
  double ps = static_cast<double>(spam) / static_cast<double>(n);
  return 1.0 - ph * ph - ps * ps;
}

// groups must be sorted by value with per-value class counts aggregated.
SplitResult best_split(const std::vector<ValueGroup>& groups, std::int64_t total[2],
                       int min_leaf) {
  SplitResult best;
  if (groups.size() < 2) return best;
  std::int64_t n = total[0] + total[1];
  double parent = gini(total[0], total[1]);
  std::int64_t left[2] = {0, 0};
  for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
    left[0] += groups[g].counts[0];
    left[1] += groups[g].counts[1];
    std::int64_t ln = left[0] + left[1];
    std::int64_t rn = n - ln;
    if (ln < min_leaf || rn < min_leaf) continue;
    double child = (static_cast<double>(ln) / static_cast<double>(n)) * gini(left[0], left[1]) +
                   (static_cast<double>(rn) / static_cast<double>(n)) *
                       gini(total[0] - left[0], total[1] - left[1]);
    double gain = parent - child;
    if (gain > best.gain + 1e-12) {
      best.found = true;
      best.gain = gain;
      best.threshold = (groups[g].value + groups[g + 1].value) / 2.0f;
      best.left_n = ln;
    }
  }
  return best;
}

class TreeBuilder {
 public:
  TreeBuilder(const SampleMatrix& x, const std::vector<int>& y, const ForestParams& p,
              int mtry, std::uint64_t stream_seed)
      : x_(x), y_(y), params_(p), mtry_(mtry), rng_(stream_seed) {}

  Tree build(std::vector<int> sample_indices) {
    Tree tree;
    grow(tree, std::move(sample_indices), 0);
    return tree;
  }

 private:
  int grow(Tree& tree, std::vector<int> samples, int depth) {
    int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::int64_t counts[2] = {0, 0};
    for (int s : samples) counts[static_cast<std::size_t>(y_[static_cast<std::size_t>(s)])]++;
    tree.nodes[static_cast<std::size_t>(node_id)].counts[0] = static_cast<std::int32_t>(counts[0]);
    tree.nodes[static_cast<std::size_t>(node_id)].counts[1] = static_cast<std::int32_t>(counts[1]);

    bool pure = counts[0] == 0 || counts[1] == 0;
    bool too_small = static_cast<int>(samples.size()) < 2 * params_.min_leaf;
    bool max_depth = params_.max_depth >= 0 && depth >= params_.max_depth;
    if (pure || too_small || max_depth) return node_id;

    auto features = sample_features();
    int best_feature = -1;
    SplitResult best;
    if (x_.is_sparse()) {
      // one pass over the node rows' nonzeros, bucketed by candidate feature
      std::unordered_map<int, std::vector<std::pair<float, int>>> buckets;
      buckets.reserve(features.size());
      for (int f : features) buckets.emplace(f, std::vector<std::pair<float, int>>{});
      for (int s : samples) {
        for (const auto& [c, v] : x_.sparse_row(static_cast<std::size_t>(s))) {
          auto it = buckets.find(c);
          if (it != buckets.end()) it->second.emplace_back(v, y_[static_cast<std::size_t>(s)]);
        }
      }
      for (int f : features) {
        auto& vals = buckets[f];
        if (vals.empty()) continue;  // all zero, nothing to split on
        auto groups = groups_from_values(std::move(vals), counts, true);
        SplitResult r = best_split(groups, counts, params_.min_leaf);
        if (r.found && r.gain > best.gain + 1e-12) {
          best = r;
          best_feature = f;
        }
      }
    } else {
      for (int f : features) {
        std::vector<std::pair<float, int>> vals;
        vals.reserve(samples.size());
        for (int s : samples)
          vals.emplace_back(x_.at(static_cast<std::size_t>(s), f),
                            y_[static_cast<std::size_t>(s)]);
        auto groups = groups_from_values(std::move(vals), counts, false);
        SplitResult r = best_split(groups, counts, params_.min_leaf);
        if (r.found && r.gain > best.gain + 1e-12) {
          best = r;
          best_feature = f;
        }
      }
    }
    if (best_feature < 0) return node_id;

    std::vector<int> left_samples, right_samples;
    left_samples.reserve(static_cast<std::size_t>(best.left_n));
    right_samples.reserve(samples.size() - static_cast<std::size_t>(best.left_n));
    for (int s : samples) {
      float v = x_.at(static_cast<std::size_t>(s), best_feature);
      (v <= best.threshold ? left_samples : right_samples).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    int left_id = grow(tree, std::move(left_samples), depth + 1);
    int right_id = grow(tree, std::move(right_samples), depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
    node.feature = best_feature;
    node.threshold = best.threshold;
    node.left = left_id;
    node.right = right_id;
    return node_id;
  }

  std::vector<int> sample_features() {
    const int d = static_cast<int>(x_.cols());
    if (mtry_ >= d) {
      std::vector<int> all(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) all[static_cast<std::size_t>(i)] = i;
      return all;
    }
    // partial Fisher-Yates without replacement
    std::unordered_map<int, int> swapped;
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(mtry_));
    for (int i = 0; i < mtry_; ++i) {
      int j = i + static_cast<int>(bounded_draw(rng_, static_cast<std::uint64_t>(d - i)));
      int vi = swapped.count(i) ? swapped[i] : i;
      int vj = swapped.count(j) ? swapped[j] : j;
      out.push_back(vj);
      swapped[j] = vi;
    }
    return out;
  }

  // vals hold the (explicitly stored) values; for sparse data the remaining
  // node rows are implicit zeros.
  std::vector<ValueGroup> groups_from_values(std::vector<std::pair<float, int>> vals,
                                             const std::int64_t node_counts[2],
                                             bool implicit_zeros) {
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<ValueGroup> groups;
    for (auto& [v, label] : vals) {
      if (groups.empty() || groups.back().value != v) groups.push_back({v, {0, 0}});
      groups.back().counts[static_cast<std::size_t>(label)]++;
    }
    if (implicit_zeros) {
      std::int64_t nzh = 0, nzs = 0;
      for (const auto& g : groups) {
        nzh += g.counts[0];
        nzs += g.counts[1];
      }
      std::int64_t zh = node_counts[0] - nzh;
      std::int64_t zs = node_counts[1] - nzs;
      if (zh + zs > 0) {
        groups.push_back({0.0f, {zh, zs}});
        std::sort(groups.begin(), groups.end(),
                  [](const ValueGroup& a, const ValueGroup& b) { return a.value < b.value; });
      }
    }
    return groups;
  }

  const SampleMatrix& x_;
  const std::vector<int>& y_;
  const ForestParams& params_;
  int mtry_;
  std::mt19937_64 rng_;
};

int leaf_vote(const Tree& tree, int node) {
  const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
  return n.counts[1] >= n.counts[0] ? 1 : 0;
}

template <class ValueFn>
int tree_vote(const Tree& tree, ValueFn&& value) {
  int node = 0;
  while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    node = value(n.feature) <= n.threshold ? n.left : n.right;
  }
  return leaf_vote(tree, node);
}

}  // namespace

Forest train(const SampleMatrix& x, const std::vector<int>& labels,
             const ForestParams& params, const std::string& schema_version) {
  const std::size_t n = x.rows();
  if (n == 0 || labels.size() != n) throw DataError("training data/label size mismatch");
  if (params.n_trees < 1 || params.min_leaf < 1) throw DataError("invalid forest parameters");
  std::int64_t class_count[2] = {0, 0};
  for (int l : labels) {
    if (l != 0 && l != 1) throw DataError("labels must be 0 (ham) or 1 (spam)");
    class_count[static_cast<std::size_t>(l)]++;
  }
  if (class_count[0] == 0) throw DataError("training corpus has no ham examples");
  if (class_count[1] == 0) throw DataError("training corpus has no spam examples");

  const int d = static_cast<int>(x.cols());
  // Default candidate count per split: sqrt(d) for dense data. Sparse text
  // matrices carry only a handful of nonzeros per row, so a sqrt(d) draw is
  // almost always all-zero inside a node and the trees stop growing; sampling
  // a tenth of the columns keeps splits productive there.
  int mtry = params.features_per_split > 0
                 ? params.features_per_split
                 : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
  if (params.features_per_split <= 0 && x.is_sparse()) mtry = std::max(mtry, d / 10);

  Forest forest;
  forest.params = params;
  forest.schema_version = schema_version;
  forest.dimension = static_cast<std::size_t>(d);
  forest.trees.resize(static_cast<std::size_t>(params.n_trees));

  std::vector<std::vector<std::uint8_t>> in_bag;
  if (params.bootstrap)
    in_bag.assign(static_cast<std::size_t>(params.n_trees), std::vector<std::uint8_t>(n, 0));

  auto train_tree = [&](int t) {
    std::uint64_t stream = util::mix64(params.rng_seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(t) + 1)));
    std::mt19937_64 boot_rng(util::mix64(stream));
    std::vector<int> samples;
    samples.reserve(n);
    if (params.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t s = static_cast<std::size_t>(bounded_draw(boot_rng, n));
        samples.push_back(static_cast<int>(s));
        in_bag[static_cast<std::size_t>(t)][s] = 1;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) samples.push_back(static_cast<int>(i));
    }
    TreeBuilder builder(x, labels, params, mtry, util::mix64(stream + 1));
    forest.trees[static_cast<std::size_t>(t)] = builder.build(std::move(samples));
  };

  unsigned hw = std::thread::hardware_concurrency();
  int n_threads = params.n_threads > 0 ? params.n_threads : static_cast<int>(hw ? hw : 4);
  n_threads = std::min(n_threads, params.n_trees);
  if (n_threads <= 1) {
    for (int t = 0; t < params.n_trees; ++t) train_tree(t);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_threads; ++w) {
      pool.emplace_back([&, w]() {
        for (int t = w; t < params.n_trees; t += n_threads) train_tree(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  if (params.bootstrap) {
    std::size_t correct = 0, voted = 0;
    for (std::size_t i = 0; i < n; ++i) {
      int votes[2] = {0, 0};
      for (int t = 0; t < params.n_trees; ++t) {
        if (in_bag[static_cast<std::size_t>(t)][i]) continue;
        int v = tree_vote(forest.trees[static_cast<std::size_t>(t)],
                          [&](int f) { return x.at(i, f); });
        votes[v]++;
      }
      if (votes[0] + votes[1] == 0) continue;
      ++voted;
      int pred = votes[1] >= votes[0] ? 1 : 0;
      if (pred == labels[i]) ++correct;
    }
    forest.oob_accuracy =
        voted == 0 ? -1.0 : static_cast<double>(correct) / static_cast<double>(voted);
  }
  return forest;
}

double predict(const Forest& forest, std::span<const float> v) {
  if (v.size() != forest.dimension) throw SchemaError("prediction vector dimension mismatch");
  int spam_votes = 0;
  for (const Tree& tree : forest.trees)
    spam_votes += tree_vote(tree, [&](int f) { return v[static_cast<std::size_t>(f)]; });
  return static_cast<double>(spam_votes) / static_cast<double>(forest.trees.size());
}

double predict_sparse(const Forest& forest, const std::vector<std::pair<int, float>>& row) {
  for (auto& [c, _] : row)
    if (c < 0 || static_cast<std::size_t>(c) >= forest.dimension)
      throw SchemaError("prediction vector dimension mismatch");
  auto value = [&](int f) {
    auto it = std::lower_bound(row.begin(), row.end(), f,
                               [](const std::pair<int, float>& p, int c) { return p.first < c; });
    return (it != row.end() && it->first == f) ? it->second : 0.0f;
  };
  int spam_votes = 0;
  for (const Tree& tree : forest.trees) spam_votes += tree_vote(tree, value);
  return static_cast<double>(spam_votes) / static_cast<double>(forest.trees.size());
}

int decide(double score, const CostMatrix& costs) {
  if (costs.cost_fp <= 0 || costs.cost_fn <= 0) throw DataError("costs must be positive");
  double threshold = costs.cost_fp / (costs.cost_fp + costs.cost_fn);
  return score >= threshold ? 1 : 0;
}

namespace {

constexpr char kMagic[4] = {'S', 'G', 'F', 'R'};
constexpr std::uint16_t kMajor = 1;
constexpr std::uint16_t kMinor = 0;

class Writer {
 public:
  void raw(const void* p, std::size_t len) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + len);
  }
  template <class T>
  void num(T v) {
    raw(&v, sizeof(T));
  }
  void str(const std::string& s) {
    num<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : buf_(b) {}
  void raw(void* p, std::size_t len) {
    if (pos_ + len > buf_.size()) throw SchemaError("corrupt model payload: truncated");
    std::memcpy(p, buf_.data() + pos_, len);
    pos_ += len;
  }
  template <class T>
  T num() {
    T v;
    raw(&v, sizeof(T));
    return v;
  }
  std::string str() {
    auto len = num<std::uint32_t>();
    if (pos_ + len > buf_.size()) throw SchemaError("corrupt model payload: truncated");
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  std::span<const std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize(const Forest& forest) {
  Writer w;
  w.raw(kMagic, 4);
  w.num(kMajor);
  w.num(kMinor);
  w.str(forest.schema_version);
  w.str(forest.class_labels[0]);
  w.str(forest.class_labels[1]);
  w.num<std::int32_t>(forest.params.n_trees);
  w.num<std::int32_t>(forest.params.max_depth);
  w.num<std::int32_t>(forest.params.min_leaf);
  w.num<std::int32_t>(forest.params.features_per_split);
  w.num<std::uint8_t>(forest.params.bootstrap ? 1 : 0);
  w.num<std::uint64_t>(forest.params.rng_seed);
  w.num<std::uint64_t>(forest.dimension);
  w.num<double>(forest.oob_accuracy);
  w.num<std::uint32_t>(static_cast<std::uint32_t>(forest.trees.size()));
  for (const Tree& t : forest.trees) {
    w.num<std::uint32_t>(static_cast<std::uint32_t>(t.nodes.size()));
    for (const TreeNode& n : t.nodes) {
      w.num<std::int32_t>(n.feature);
      w.num<float>(n.threshold);
      w.num<std::int32_t>(n.left);
      w.num<std::int32_t>(n.right);
      w.num<std::int32_t>(n.counts[0]);
      w.num<std::int32_t>(n.counts[1]);
    }
  }
  return w.take();
}

Forest deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw SchemaError("not a forest model file");
  auto major = r.num<std::uint16_t>();
  r.num<std::uint16_t>();  // minor, forward compatible
  if (major > kMajor)
    throw SchemaError("model format version " + std::to_string(major) + " is newer than supported");
  Forest f;
  f.schema_version = r.str();
  f.class_labels[0] = r.str();
  f.class_labels[1] = r.str();
  f.params.n_trees = r.num<std::int32_t>();
  f.params.max_depth = r.num<std::int32_t>();
  f.params.min_leaf = r.num<std::int32_t>();
  f.params.features_per_split = r.num<std::int32_t>();
  f.params.bootstrap = r.num<std::uint8_t>() != 0;
  f.params.rng_seed = r.num<std::uint64_t>();
  f.dimension = r.num<std::uint64_t>();
  f.oob_accuracy = r.num<double>();
  auto n_trees = r.num<std::uint32_t>();
  f.trees.resize(n_trees);
  for (auto& t : f.trees) {
    auto n_nodes = r.num<std::uint32_t>();
    t.nodes.resize(n_nodes);
    for (auto& n : t.nodes) {
      n.feature = r.num<std::int32_t>();
      n.threshold = r.num<float>();
      n.left = r.num<std::int32_t>();
      n.right = r.num<std::int32_t>();
      n.counts[0] = r.num<std::int32_t>();
      n.counts[1] = r.num<std::int32_t>();
    }
  }
  if (!r.done()) throw SchemaError("corrupt model payload: trailing bytes");
  return f;
}

void save(const Forest& forest, const std::filesystem::path& path) {
  auto bytes = serialize(forest);
  util::write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Forest load(const std::filesystem::path& path) {
  std::string data = util::read_file(path);
  return deserialize(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

std::string text_dump(const Forest& forest) {
  std::ostringstream out;
  out.precision(9);
  out << "forest schema=" << forest.schema_version << " dim=" << forest.dimension
      << " trees=" << forest.trees.size() << " labels=" << forest.class_labels[0] << ","
      << forest.class_labels[1] << " seed=" << forest.params.rng_seed
      << " oob=" << forest.oob_accuracy << "\n";
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    out << "tree " << t << "\n";
    const auto& nodes = forest.trees[t].nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const TreeNode& n = nodes[i];
      if (n.feature < 0) {
        out << "  " << i << " leaf ham=" << n.counts[0] << " spam=" << n.counts[1] << "\n";
      } else {
        out << "  " << i << " split f" << n.feature << " <= " << n.threshold << " -> " << n.left
            << "," << n.right << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace smsguard::model
