#include "smsguard/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <random>
#include <sstream>

#include "smsguard/util.hpp"

namespace smsguard::eval {

Confusion& Confusion::operator+=(const Confusion& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

void Confusion::add(int truth, int predicted) {
  if ((truth != 0 && truth != 1) || (predicted != 0 && predicted != 1))
    throw DataError("labels must be 0 (ham) or 1 (spam)");
  if (truth == 1)
    predicted == 1 ? ++tp : ++fn;
  else
    predicted == 1 ? ++fp : ++tn;
}

namespace {

ClassMetrics class_metrics(long tp, long fp, long fn) {
  ClassMetrics m;
  if (tp + fp == 0) {
    m.degenerate = true;
  } else {
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    m.degenerate = true;
  } else {
    m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  if (m.precision + m.recall > 0.0)
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

}  // namespace

Report metrics(const Confusion& c) {
  if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0)
    throw DataError("negative confusion cell");
  if (c.tp + c.fn == 0 || c.tn + c.fp == 0)
    throw DataError("metrics need at least one example of each class");

  Report r;
  r.confusion = c;
  r.spam = class_metrics(c.tp, c.fp, c.fn);
  r.ham = class_metrics(c.tn, c.fn, c.fp);  // ham precision denominator: tn + fn
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  r.macro_precision = (r.spam.precision + r.ham.precision) / 2.0;
  r.macro_recall = (r.spam.recall + r.ham.recall) / 2.0;
  r.macro_f1 = (r.spam.f1 + r.ham.f1) / 2.0;
  double spam_support = static_cast<double>(c.tp + c.fn);
  double ham_support = static_cast<double>(c.tn + c.fp);
  r.weighted_f1 =
      (r.spam.f1 * spam_support + r.ham.f1 * ham_support) / (spam_support + ham_support);
  r.fp_rate = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  r.fn_rate = static_cast<double>(c.fn) / static_cast<double>(c.fn + c.tp);
  return r;
}

std::string config_fingerprint(const std::string& config_description, std::uint64_t seed) {
  auto h = util::fnv1a(config_description);
  h = util::fnv1a(std::to_string(seed), h);
  return util::hex64(h);
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int k, std::uint64_t seed) {
  if (k < 2) throw DataError("k must be >= 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DataError("labels must be 0 or 1");
    by_class[labels[i]].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < static_cast<std::size_t>(k))
      throw DataError("class " + std::to_string(c) + " has fewer than k=" + std::to_string(k) +
                      " examples; some fold would miss it");
  }
  std::vector<int> fold(labels.size(), 0);
  for (int c = 0; c < 2; ++c) {
    std::mt19937_64 rng(util::mix64(seed ^ (0x9e3779b97f4a7c15ULL * (c + 1))));
    auto& idx = by_class[c];
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng() % i]);
    for (std::size_t i = 0; i < idx.size(); ++i)
      fold[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return fold;
}

Report kfold_cv(const std::vector<int>& labels, int k, std::uint64_t seed,
                const FitPredictFn& fit_predict, const std::string& config_description) {
  auto fold = stratified_folds(labels, k, seed);
  Confusion aggregate;
  std::vector<Confusion> per_fold;
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      (fold[i] == f ? test_idx : train_idx).push_back(i);
    auto decided = fit_predict(train_idx, test_idx);
    if (decided.size() != test_idx.size())
      throw DataError("fold " + std::to_string(f) + ": prediction count mismatch");
    Confusion c;
    for (std::size_t i = 0; i < test_idx.size(); ++i)
      c.add(labels[test_idx[i]], decided[i]);
    per_fold.push_back(c);
    aggregate += c;
  }
  Report r = metrics(aggregate);
  r.folds = std::move(per_fold);
  r.fingerprint = config_fingerprint(config_description + "|k=" + std::to_string(k), seed);
  return r;
}

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6) << v;
  return out.str();
}

}  // namespace

std::string Report::text() const {
  std::ostringstream out;
  out << "confusion tp=" << confusion.tp << " fp=" << confusion.fp << " tn=" << confusion.tn
      << " fn=" << confusion.fn << "\n";
  out << "spam  P=" << fmt(spam.precision) << " R=" << fmt(spam.recall)
      << " F1=" << fmt(spam.f1) << "\n";
  out << "ham   P=" << fmt(ham.precision) << " R=" << fmt(ham.recall) << " F1=" << fmt(ham.f1)
      << "\n";
  out << "macro P=" << fmt(macro_precision) << " R=" << fmt(macro_recall)
      << " F1=" << fmt(macro_f1) << " (weighted F1=" << fmt(weighted_f1) << ")\n";
  out << "accuracy=" << fmt(accuracy) << " fp_rate=" << fmt(fp_rate)
      << " fn_rate=" << fmt(fn_rate) << "\n";
  if (!folds.empty()) out << "folds=" << folds.size() << "\n";
  if (!fingerprint.empty()) out << "fingerprint=" << fingerprint << "\n";
  return out.str();
}

std::string Report::machine_lines() const {
  std::ostringstream out;
  auto line = [&](const std::string& name, double value, const std::string& scope) {
    out << name << "\t" << fmt(value) << "\t" << scope << "\n";
  };
  line("spam_precision", spam.precision, "overall");
  line("spam_recall", spam.recall, "overall");
  line("spam_f1", spam.f1, "overall");
  line("ham_precision", ham.precision, "overall");
  line("ham_recall", ham.recall, "overall");
  line("ham_f1", ham.f1, "overall");
  line("macro_f1", macro_f1, "overall");
  line("weighted_f1", weighted_f1, "overall");
  line("accuracy", accuracy, "overall");
  line("fp_rate", fp_rate, "overall");
  line("fn_rate", fn_rate, "overall");
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto& c = folds[f];
    std::string scope = "fold" + std::to_string(f);
    line("tp", static_cast<double>(c.tp), scope);
    line("fp", static_cast<double>(c.fp), scope);
    line("tn", static_cast<double>(c.tn), scope);
    line("fn", static_cast<double>(c.fn), scope);
  }
  if (!fingerprint.empty()) out << "fingerprint\t" << fingerprint << "\toverall\n";
  return out.str();
}

ReplaySeries temporal_replay(const std::vector<std::int64_t>& timestamps,
                             const std::vector<int>& truths, const std::vector<int>& decisions,
                             std::int64_t bucket_seconds, double drift_delta,
                             const std::string& config_description, std::uint64_t seed) {
  if (timestamps.size() != truths.size() || truths.size() != decisions.size())
    throw DataError("temporal_replay input arrays differ in length");
  if (timestamps.empty()) throw DataError("temporal_replay needs a non-empty stream");
  if (bucket_seconds < 1) throw DataError("bucket must be at least 1 second");
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (timestamps[i] < timestamps[i - 1])
      throw DataError("stream is unordered at index " + std::to_string(i));

  std::int64_t origin = timestamps.front();
  std::size_t n_buckets =
      static_cast<std::size_t>((timestamps.back() - origin) / bucket_seconds) + 1;

  ReplaySeries series;
  series.drift_delta = drift_delta;
  series.buckets.resize(n_buckets);
  for (std::size_t b = 0; b < n_buckets; ++b) {
    series.buckets[b].bucket_start = origin + static_cast<std::int64_t>(b) * bucket_seconds;
    series.buckets[b].empty = true;
  }

  Confusion aggregate;
  for (std::size_t i = 0; i < timestamps.size(); ++i) {
    auto b = static_cast<std::size_t>((timestamps[i] - origin) / bucket_seconds);
    series.buckets[b].confusion.add(truths[i], decisions[i]);
    series.buckets[b].empty = false;
    aggregate.add(truths[i], decisions[i]);
  }

  double trailing_sum = 0.0;
  int trailing_count = 0;
  for (auto& bucket : series.buckets) {
    if (bucket.empty) continue;  // gap stays recorded with empty=true
    const auto& c = bucket.confusion;
    ClassMetrics spam = class_metrics(c.tp, c.fp, c.fn);
    ClassMetrics ham = class_metrics(c.tn, c.fn, c.fp);
    bucket.macro_f1 = (spam.f1 + ham.f1) / 2.0;
    if (trailing_count > 0) {
      double trailing_mean = trailing_sum / trailing_count;
      bucket.drift_flag = bucket.macro_f1 < trailing_mean - drift_delta;
    }
    trailing_sum += bucket.macro_f1;
    ++trailing_count;
  }

  series.overall = metrics(aggregate);
  series.overall.fingerprint = config_fingerprint(
      config_description + "|bucket=" + std::to_string(bucket_seconds), seed);
  return series;
}

std::string ReplaySeries::csv() const {
  std::ostringstream out;
  out << "bucket_start,empty,tp,fp,tn,fn,macro_f1,drift_flag\n";
  for (const auto& b : buckets) {
    out << b.bucket_start << "," << (b.empty ? 1 : 0) << "," << b.confusion.tp << ","
        << b.confusion.fp << "," << b.confusion.tn << "," << b.confusion.fn << ","
        << fmt(b.macro_f1) << "," << (b.drift_flag ? 1 : 0) << "\n";
  }
  return out.str();
}

}  // namespace smsguard::eval
