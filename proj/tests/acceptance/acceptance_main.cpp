// Acceptance gate: one pass/fail line per release criterion. Exit code is
// nonzero when any criterion that could be exercised in this environment
// fails; criteria whose external inputs are absent are reported as FAIL with
// the reason but do not mask the rest of the suite.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "smsguard/cluster.hpp"
#include "smsguard/entity.hpp"
#include "smsguard/eval.hpp"
#include "smsguard/mpa.hpp"
#include "smsguard/pipeline.hpp"
#include "smsguard/simgen.hpp"
#include "smsguard/util.hpp"

using namespace smsguard;
using Clock = std::chrono::steady_clock;

namespace {

const std::filesystem::path kData = SMSGUARD_DATA_DIR;

struct Gate {
  int failures = 0;
  int unavailable = 0;

  void result(int criterion, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion-" << criterion << ": " << detail
              << std::endl;
    if (!ok) ++failures;
  }

  void missing_input(int criterion, const std::string& detail) {
    std::cout << "FAIL criterion-" << criterion << ": " << detail
              << " [input unavailable in this environment; not counted against the exit code]"
              << std::endl;
    ++unavailable;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string f6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// ---- criterion 1: public SMS collection benchmark ----

void criterion1(Gate& gate, const pipeline::Context& ctx) {
  auto path = kData / "smsspamcollection" / "SMSSpamCollection";
  if (!std::filesystem::exists(path)) {
    gate.missing_input(1, "public SMS collection not found at " + path.string() +
                              "; place the tab-separated ham/spam file there to run the "
                              "10-fold benchmark (target: spam F1 >= 0.90, FP rate <= 1%)");
    return;
  }
  try {
    std::vector<Message> messages;
    std::vector<int> labels;
    pipeline::load_sms_collection(path, messages, labels);
    pipeline::ExperimentConfig cfg;
    cfg.features = pipeline::FeatureSet::Mela;
    cfg.forest.n_trees = 300;
    cfg.forest.rng_seed = 20240901;
    cfg.costs.cost_fp = 3.0;  // decision threshold 0.75 to hold the FP budget
    cfg.costs.cost_fn = 1.0;
    auto report = pipeline::evaluate_messages(messages, labels, cfg, ctx, 10, 20240901);
    bool ok = report.spam.f1 >= 0.90 && report.fp_rate <= 0.01;
    gate.result(1, ok,
                "public collection 10-fold: spam F1=" + f6(report.spam.f1) +
                    " (>=0.90), fp_rate=" + f6(report.fp_rate) + " (<=0.01), n=" +
                    std::to_string(messages.size()));
  } catch (const std::exception& e) {
    gate.result(1, false, std::string("public collection benchmark failed: ") + e.what());
  }
}

// ---- criteria 2 and 3: synthetic margins and normalization lift ----

void criteria2and3(Gate& gate, const pipeline::Context& ctx, const simgen::Pools& pools) {
  auto gen_cfg = simgen::GenConfig::load(kData / "simgen" / "genconfig.json");
  auto corpus = simgen::gen_messages(gen_cfg, pools);

  // Single 75/25 chronological holdout: the generator interleaves classes
  // along the timeline, and one training pass per arm keeps the whole
  // comparison inside the runtime budget on a single core.
  std::size_t n = corpus.messages.size();
  std::size_t n_train = n * 3 / 4;
  std::vector<Message> train(corpus.messages.begin(),
                             corpus.messages.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<int> train_labels(corpus.labels.begin(),
                                corpus.labels.begin() + static_cast<std::ptrdiff_t>(n_train));

  auto run = [&](pipeline::FeatureSet fs, bool normalize) {
    pipeline::ExperimentConfig cfg;
    cfg.features = fs;
    cfg.normalize = normalize;
    cfg.forest.rng_seed = 4242;
    cfg.costs = {3.0, 1.0};
    if (fs == pipeline::FeatureSet::Mela) {
      cfg.forest.n_trees = 60;
      cfg.forest.max_depth = 24;
    } else {
      cfg.forest.n_trees = 40;
      cfg.forest.max_depth = -1;
    }
    auto m = pipeline::train_message_model(train, train_labels, cfg, ctx);
    long tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = n_train; i < n; ++i) {
      int d = m.decide(corpus.messages[i], ctx);
      if (corpus.labels[i] && d)
        ++tp;
      else if (corpus.labels[i])
        ++fn;
      else if (d)
        ++fp;
      else
        ++tn;
    }
    auto f1 = [](long a, long b, long c) {
      double p = a + b > 0 ? static_cast<double>(a) / (a + b) : 0.0;
      double r = a + c > 0 ? static_cast<double>(a) / (a + c) : 0.0;
      return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
    };
    return (f1(tp, fp, fn) + f1(tn, fn, fp)) / 2.0;  // macro F1
  };

  auto t0 = Clock::now();
  double mela = run(pipeline::FeatureSet::Mela, true);
  double sgram = run(pipeline::FeatureSet::Sgram, true);
  double ngram = run(pipeline::FeatureSet::Ngram, true);
  double elapsed = seconds_since(t0);

  bool margins = mela >= sgram + 0.02 && sgram >= ngram + 0.02;
  bool in_time = elapsed <= 300.0;
  gate.result(2, margins && in_time,
              "synthetic 20k macro F1: mela=" + f6(mela) + " sgram=" + f6(sgram) +
                  " ngram=" + f6(ngram) + " (margins >= 0.02), elapsed=" + f6(elapsed) +
                  "s (<=300)");

  double sgram_raw = run(pipeline::FeatureSet::Sgram, false);
  double ngram_raw = run(pipeline::FeatureSet::Ngram, false);
  double sgram_lift = sgram - sgram_raw;
  double ngram_lift = ngram - ngram_raw;
  bool lift_ok = sgram_lift >= 0.005 && ngram_lift >= 0.005;
  gate.result(3, lift_ok,
              "normalization lift: sgram=" + f6(sgram_lift) + " ngram=" + f6(ngram_lift) +
                  " (each >= 0.005)");
}

// ---- criterion 4: obfuscation regression set ----

void criterion4(Gate& gate, const pipeline::Context& ctx) {
  using entity::EntityKind;
  bool ok = true;
  std::string why;

  auto s1 = entity::extract_entities(
      "\\rOtOcarr0.K0nprare/0ld/trashed/crashed up/k.a.r.s/\\callus now555O5O5O5O",
      ctx.resources);
  auto phones = s1.of_kind(EntityKind::Phone);
  if (s1.count(EntityKind::Url) != 0 || phones.size() != 1 ||
      phones[0]->canonical != "5550505050") {
    ok = false;
    why += "[homoglyph-phone message] ";
  }

  auto s2 = entity::extract_entities("Hi, I want to meet you tonight, spamdomain.com.Support me",
                                     ctx.resources);
  auto urls = s2.of_kind(EntityKind::Url);
  if (urls.size() != 1 || urls[0]->canonical != "spamdomain.com") {
    ok = false;
    why += "[glued-suffix url message] ";
  }

  auto s3 = entity::extract_entities("Ive had a lot of fun tonight.tk", ctx.resources);
  auto timex = s3.of_kind(EntityKind::Timex);
  if (s3.count(EntityKind::Url) != 0 || timex.size() != 1 || timex[0]->canonical != "tonight") {
    ok = false;
    why += "[word-vs-domain message] ";
  }

  gate.result(4, ok, ok ? "all three obfuscation regression messages extract exactly as pinned"
                        : "regression mismatch: " + why);
}

// ---- criterion 5: substring automaton vs naive scan ----

int naive_occurrences(const std::string& text, const std::string& pattern) {
  int n = 0;
  for (std::size_t pos = text.find(pattern); pos != std::string::npos;
       pos = text.find(pattern, pos + 1))
    ++n;
  return n;
}

void criterion5(Gate& gate, const pipeline::Context& ctx) {
  std::vector<std::string> patterns;
  for (const auto& [_, members] : ctx.clusters.clusters)
    for (const auto& m : members) patterns.push_back(m);

  std::mt19937_64 rng(555);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz 0123456789.!";
  bool ok = true;
  std::string why;
  for (int iter = 0; iter < 1000 && ok; ++iter) {
    std::string text;
    std::size_t len = rng() % 300;
    while (text.size() < len) {
      if (rng() % 4 == 0)
        text += patterns[rng() % patterns.size()];
      else
        text.push_back(alphabet[rng() % alphabet.size()]);
    }
    auto stats = ctx.matcher.count_with_stats(text);
    if (stats.positions_visited > text.size()) {
      ok = false;
      why = "positions_visited exceeded text length on iteration " + std::to_string(iter);
      break;
    }
    std::string lower = util::to_lower(text);
    std::vector<int> expect(ctx.matcher.num_clusters(), 0);
    for (std::size_t c = 0; c < ctx.clusters.clusters.size(); ++c)
      for (const auto& m : ctx.clusters.clusters[c].second)
        expect[c] += naive_occurrences(lower, m);
    if (stats.counts != expect) {
      ok = false;
      why = "cluster counts diverged from the naive scan on iteration " + std::to_string(iter);
    }
  }
  gate.result(5, ok,
              ok ? "automaton matches the naive scanner on 1000 random texts with bounded work"
                 : why);
}

// ---- criteria 6 and 7: sender pipeline quality and streaming equivalence ----

simgen::StreamConfig training_stream_config() {
  auto cfg = simgen::StreamConfig::defaults();
  cfg.seed = 9100;
  cfg.n_spam_senders = 220;
  cfg.n_legit_senders = 220;
  cfg.duration = 21 * 86400;
  // explicit-CTA campaigns only; implicit traffic stays unseen until replay
  cfg.campaigns.clear();
  simgen::CampaignSpec fast{"prize-url", simgen::CtaKind::Url, 0.5, 0.4,
                            simgen::SenderStrategy::FastSingle, simgen::Targeting::RandomUniform,
                            120};
  simgen::CampaignSpec phone{"prize-phone", simgen::CtaKind::Phone, 0.5, 0.3,
                             simgen::SenderStrategy::FastSingle, simgen::Targeting::RandomUniform,
                             120};
  simgen::CampaignSpec slow{"phish-url", simgen::CtaKind::Url, 0.8, 0.3,
                            simgen::SenderStrategy::SlowDistributed, simgen::Targeting::ListBased,
                            60};
  cfg.campaigns = {fast, phone, slow};
  return cfg;
}

void criterion6(Gate& gate, const pipeline::Context& ctx, const simgen::LabeledStream& stream,
                const pipeline::SenderVectors& vectors) {
  std::vector<int> labels;
  int spam = 0, legit = 0;
  for (const auto& s : vectors.senders) {
    int y = stream.sender_labels.at(s);
    labels.push_back(y);
    (y == 1 ? spam : legit)++;
  }
  if (spam < 200 || legit < 200) {
    gate.result(6, false,
                "insufficient emitted senders: spam=" + std::to_string(spam) +
                    " legit=" + std::to_string(legit) + " (need >= 200 each)");
    return;
  }
  auto fit_predict = [&](const std::vector<std::size_t>& train_idx,
                         const std::vector<std::size_t>& test_idx) {
    std::vector<std::vector<float>> rows;
    std::vector<int> train_labels;
    for (auto i : train_idx) {
      rows.emplace_back(vectors.vectors[i].values.begin(), vectors.vectors[i].values.end());
      train_labels.push_back(labels[i]);
    }
    model::ForestParams params;
    params.n_trees = 80;
    params.rng_seed = 616;
    auto forest = model::train(model::SampleMatrix::dense(std::move(rows)), train_labels, params,
                               mpa::kSchemaVersion);
    std::vector<int> out;
    for (auto i : test_idx) {
      double score = model::predict(
          forest, std::span<const float>(vectors.vectors[i].values.data(), mpa::kFeatureCount));
      out.push_back(model::decide(score, model::CostMatrix{}));
    }
    return out;
  };
  auto report = eval::kfold_cv(labels, 10, 616, fit_predict, "sender-cv");
  gate.result(6, report.macro_f1 >= 0.95,
              "sender 10-fold macro F1=" + f6(report.macro_f1) + " (>=0.95) over " +
                  std::to_string(labels.size()) + " senders (spam=" + std::to_string(spam) +
                  ", legit=" + std::to_string(legit) + ")");
}

std::string window_signature(const mpa::SenderWindow& w, const mpa::NetworkEncoder& enc,
                             const std::unordered_set<std::string>& us) {
  std::ostringstream out;
  out << w.sender << "|" << w.window_start << "|" << w.window_end << "|" << w.messages.size();
  auto v = mpa::mpa_features(w, enc, us);
  out.setf(std::ios::scientific);
  out.precision(17);
  for (float x : v.values) out << "|" << x;
  return out.str();
}

void criterion7(Gate& gate, const pipeline::Context& ctx, const simgen::LabeledStream& stream,
                const mpa::NetworkEncoder& encoder) {
  std::vector<Message> batch(stream.messages.begin(),
                             stream.messages.begin() +
                                 std::min<std::size_t>(stream.messages.size(), 30000));
  // streaming arrival: shuffle the day, restore timestamp order, then re-apply
  // legal cross-sender delivery jitter inside the skew tolerance
  std::vector<Message> arrival = batch;
  std::mt19937_64 rng(717);
  std::shuffle(arrival.begin(), arrival.end(), rng);
  std::sort(arrival.begin(), arrival.end(), [](const Message& a, const Message& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.id < b.id;
  });
  for (std::size_t i = 0; i + 1 < arrival.size(); ++i) {
    if (arrival[i].sender != arrival[i + 1].sender &&
        arrival[i + 1].timestamp - arrival[i].timestamp <= 30 && rng() % 2 == 0)
      std::swap(arrival[i], arrival[i + 1]);
  }

  mela::Featurizer ft;
  ft.res = &ctx.resources;
  ft.lexicon = &ctx.lexicon;
  ft.matcher = &ctx.matcher;
  ft.keywords = &ctx.keywords;

  auto collect = [&](const std::vector<Message>& msgs) {
    mpa::Aggregator agg(mpa::AggregatorConfig{}, &ft);
    std::vector<std::string> sigs;
    for (const auto& m : msgs)
      if (auto w = agg.ingest(m)) sigs.push_back(window_signature(*w, encoder, ctx.us_networks));
    std::sort(sigs.begin(), sigs.end());
    std::string all;
    for (const auto& s : sigs) all += s + "\n";
    return all;
  };
  auto a = collect(batch);
  auto b = collect(arrival);
  gate.result(7, !a.empty() && a == b,
              a == b ? "streaming (skewed arrival) and batch runs emit byte-identical windows"
                     : "streaming and batch window emissions diverged");
}

// ---- criterion 8: temporal drift replay ----

void criterion8(Gate& gate, const pipeline::Context& ctx, const simgen::Pools& pools,
                const pipeline::SenderModel& frozen) {
  auto cfg = training_stream_config();
  cfg.seed = 9111;
  cfg.n_spam_senders = 200;
  cfg.n_legit_senders = 60;
  cfg.duration = 22 * 7 * 86400;
  cfg.novel_bucket = 12;
  cfg.novel_senders = 8;
  auto replay = simgen::gen_sender_streams(cfg, pools);

  mela::Featurizer ft;
  ft.res = &ctx.resources;
  ft.lexicon = &ctx.lexicon;
  ft.matcher = &ctx.matcher;
  ft.keywords = &ctx.keywords;

  mpa::Aggregator agg(mpa::AggregatorConfig{}, &ft);
  std::vector<std::int64_t> ts;
  std::vector<int> truths, decisions;
  for (const auto& m : replay.messages) {
    auto w = agg.ingest(m);
    if (!w) continue;
    auto v = mpa::mpa_features(*w, frozen.encoder, ctx.us_networks);
    double score =
        model::predict(frozen.forest, std::span<const float>(v.values.data(), v.values.size()));
    ts.push_back(w->window_end);
    truths.push_back(replay.sender_labels.at(w->sender));
    decisions.push_back(model::decide(score, frozen.costs));
  }
  if (ts.empty()) {
    gate.result(8, false, "replay produced no emitted windows");
    return;
  }
  auto series = eval::temporal_replay(ts, truths, decisions);

  // the injected campaign surfaces one week after its configured bucket start,
  // measured from the first emission rather than the stream origin
  std::int64_t novel_ts = cfg.start_time + 12 * cfg.bucket_seconds;
  auto expected = static_cast<long>((novel_ts - ts.front()) / (7 * 86400)) + 1;
  std::vector<long> flagged;
  for (std::size_t b = 0; b < series.buckets.size(); ++b)
    if (series.buckets[b].drift_flag) flagged.push_back(static_cast<long>(b));
  bool one_flag = !flagged.empty();
  bool localized = true;
  for (long b : flagged)
    if (std::labs(b - expected) > 1) localized = false;

  std::ostringstream detail;
  detail << "replay over " << series.buckets.size() << " weekly buckets, expected dip near bucket "
         << expected << ", flagged = {";
  for (std::size_t i = 0; i < flagged.size(); ++i) detail << (i ? "," : "") << flagged[i];
  detail << "}";
  gate.result(8, series.buckets.size() >= 20 && one_flag && localized, detail.str());
}

// ---- criterion 9: model determinism and serialization round-trip ----

void criterion9(Gate& gate) {
  std::mt19937_64 rng(909);
  auto noise = [&] { return (static_cast<double>(rng() >> 11) / 9007199254740992.0 - 0.5); };
  std::vector<std::vector<float>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 1500; ++i) {
    int y = i % 2;
    std::vector<float> row(20);
    for (int d = 0; d < 20; ++d)
      row[d] = static_cast<float>((y ? 1.2 : -1.2) * ((d % 3) == 0) + noise());
    rows.push_back(std::move(row));
    labels.push_back(y);
  }
  model::ForestParams params;
  params.n_trees = 60;
  params.rng_seed = 909;

  params.n_threads = 1;
  auto f1 = model::train(model::SampleMatrix::dense(rows), labels, params, "bench-1");
  params.n_threads = 4;
  auto f2 = model::train(model::SampleMatrix::dense(rows), labels, params, "bench-1");
  bool deterministic = model::text_dump(f1) == model::text_dump(f2);

  auto bytes = model::serialize(f1);
  auto back = model::deserialize(bytes);
  bool round_trip = model::text_dump(back) == model::text_dump(f1);

  bool predictions_match = true;
  for (int i = 0; i < 1000 && predictions_match; ++i) {
    std::vector<float> v(20);
    for (auto& x : v) x = static_cast<float>(noise() * 4.0);
    predictions_match = model::predict(f1, v) == model::predict(back, v);
  }
  gate.result(9, deterministic && round_trip && predictions_match,
              std::string("determinism across thread counts: ") +
                  (deterministic ? "ok" : "BROKEN") + ", serialization round-trip: " +
                  (round_trip ? "ok" : "BROKEN") + ", 1000 prediction comparisons: " +
                  (predictions_match ? "ok" : "BROKEN"));
}

// ---- criterion 10: recipient entropy oracle ----

void criterion10(Gate& gate) {
  std::mt19937_64 rng(1010);
  bool ok = true;
  for (int iter = 0; iter < 1000 && ok; ++iter) {
    std::vector<std::string> recipients;
    std::size_t n = 1 + rng() % 60;
    for (std::size_t i = 0; i < n; ++i) {
      std::string r;
      std::size_t len = 4 + rng() % 8;
      for (std::size_t j = 0; j < len; ++j) r.push_back(static_cast<char>('0' + rng() % 10));
      recipients.push_back(r);
    }
    // independent histogram implementation of the definition
    std::set<std::string> unique(recipients.begin(), recipients.end());
    double expect = 0.0;
    for (int p = 1; p <= 7; ++p) {
      std::map<char, int> hist;
      for (const auto& d : unique)
        hist[static_cast<std::size_t>(p) <= d.size() ? d[d.size() - p] : '0']++;
      double h = 0.0;
      for (auto& [_, c] : hist) {
        double prob = static_cast<double>(c) / static_cast<double>(unique.size());
        h -= prob * std::log2(prob);
      }
      expect += h;
    }
    expect /= 7.0;
    ok = std::abs(mpa::recipient_entropy(recipients) - expect) <= 1e-12;
  }
  gate.result(10, ok, ok ? "entropy matches the direct histogram oracle within 1e-12 on 1000 sets"
                         : "entropy diverged from the histogram oracle");
}

}  // namespace

int main() {
  Gate gate;
  try {
    auto ctx = pipeline::Context::load(kData);
    auto pools = simgen::Pools::load(kData, ctx.lexicon);

    criterion1(gate, ctx);
    criteria2and3(gate, ctx, pools);
    criterion4(gate, ctx);
    criterion5(gate, ctx);

    auto stream_cfg = training_stream_config();
    auto stream = simgen::gen_sender_streams(stream_cfg, pools);
    auto encoder = pipeline::build_network_encoder(stream.messages);
    auto vectors =
        pipeline::collect_sender_vectors(stream.messages, ctx, encoder, mpa::AggregatorConfig{});
    criterion6(gate, ctx, stream, vectors);
    criterion7(gate, ctx, stream, encoder);

    model::ForestParams sender_params;
    sender_params.n_trees = 100;
    sender_params.rng_seed = 808;
    auto frozen = pipeline::train_sender_model(stream.messages, stream.sender_labels, ctx,
                                               sender_params, mpa::AggregatorConfig{},
                                               model::CostMatrix{});
    criterion8(gate, ctx, pools, frozen);

    criterion9(gate);
    criterion10(gate);
  } catch (const std::exception& e) {
    std::cout << "FAIL harness: unexpected exception: " << e.what() << std::endl;
    return 1;
  }

  std::cout << "summary: " << (10 - gate.failures - gate.unavailable) << " passed, "
            << gate.failures << " failed, " << gate.unavailable
            << " blocked on unavailable inputs" << std::endl;
  return gate.failures == 0 ? 0 : 1;
}
