#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace smsguard::eval {

// spam = positive class
struct Confusion {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  long total() const { return tp + fp + tn + fn; }
  Confusion& operator+=(const Confusion& o);
  void add(int truth, int predicted);  // labels: 0 = ham, 1 = spam
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // a zero denominator was hit
};

struct Report {
  Confusion confusion;
  ClassMetrics spam;
  ClassMetrics ham;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;       // primary average
  double weighted_f1 = 0.0;    // support-weighted alternative
  double fp_rate = 0.0;        // fp / (fp + tn)
  double fn_rate = 0.0;        // fn / (fn + tp)
  std::vector<Confusion> folds;
  std::string fingerprint;

  std::string text() const;          // human-readable block
  std::string machine_lines() const; // one metric per line: name<TAB>value<TAB>scope
};

// Throws DataError when either class has zero support.
Report metrics(const Confusion& c);

std::string config_fingerprint(const std::string& config_description, std::uint64_t seed);

// Stratified seeded fold assignment: fold id per example.
std::vector<int> stratified_folds(const std::vector<int>& labels, int k, std::uint64_t seed);

// fit_predict(train_idx, test_idx) returns one decided label per test index,
// trained only on the train split.
using FitPredictFn = std::function<std::vector<int>(const std::vector<std::size_t>&,
                                                    const std::vector<std::size_t>&)>;

Report kfold_cv(const std::vector<int>& labels, int k, std::uint64_t seed,
                const FitPredictFn& fit_predict, const std::string& config_description);

struct BucketReport {
  std::int64_t bucket_start = 0;
  bool empty = false;     // gap in the stream; no metrics
  Confusion confusion;
  double macro_f1 = 0.0;
  bool drift_flag = false;  // F1 fell more than delta below the trailing mean
};

struct ReplaySeries {
  std::vector<BucketReport> buckets;
  Report overall;
  double drift_delta = 0.05;

  std::string csv() const;  // bucket series for plotting
};

// Frozen-model replay: (timestamp, truth, decision) triples in non-decreasing
// timestamp order, bucketed from the first timestamp.
ReplaySeries temporal_replay(const std::vector<std::int64_t>& timestamps,
                             const std::vector<int>& truths,
                             const std::vector<int>& decisions,
                             std::int64_t bucket_seconds = 7 * 86400,
                             double drift_delta = 0.05,
                             const std::string& config_description = "replay",
                             std::uint64_t seed = 0);

}  // namespace smsguard::eval
