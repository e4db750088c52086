#include "smsguard/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "smsguard/util.hpp"

namespace smsguard::pipeline {

Context Context::load(const std::filesystem::path& data_dir) {
  Context ctx{entity::Resources::load(data_dir),
              textnorm::load_lexicon(data_dir / "lexicon.tsv"),
              cluster::ClusterSet::load(data_dir / "clusters.txt"),
              cluster::ClusterMatcher(cluster::ClusterSet::load(data_dir / "clusters.txt")),
              mela::KeywordLists::load(data_dir / "keywords"),
              mpa::load_us_networks(data_dir / "networks" / "us_networks.txt")};
  ctx.clusters.validate(static_cast<int>(mela::kNumClusters));
  return ctx;
}

FeatureSet feature_set_from_string(const std::string& s) {
  if (s == "mela") return FeatureSet::Mela;
  if (s == "ngram") return FeatureSet::Ngram;
  if (s == "sgram") return FeatureSet::Sgram;
  throw DataError("unknown feature set '" + s + "' (expected mela|ngram|sgram)");
}

std::string to_string(FeatureSet fs) {
  switch (fs) {
    case FeatureSet::Mela: return "mela";
    case FeatureSet::Ngram: return "ngram";
    case FeatureSet::Sgram: return "sgram";
  }
  throw DataError("unreachable feature set");
}

std::string ExperimentConfig::describe() const {
  std::ostringstream out;
  out << "features=" << to_string(features) << ";normalize=" << (normalize ? 1 : 0)
      << ";trees=" << forest.n_trees << ";depth=" << forest.max_depth
      << ";min_leaf=" << forest.min_leaf << ";mtry=" << forest.features_per_split
      << ";bootstrap=" << (forest.bootstrap ? 1 : 0) << ";seed=" << forest.rng_seed
      << ";dom_trees=" << domain_forest.n_trees << ";cost_fp=" << costs.cost_fp
      << ";cost_fn=" << costs.cost_fn << ";vocab_cap=" << vocab_cap
      << ";df_min=" << vocab_df_min << ";nmax=" << ngram_nmax << ";osb_n=" << osb_n
      << ";osb_w=" << osb_window;
  return out.str();
}

namespace {

mela::Featurizer make_featurizer(const Context& ctx, const ExperimentConfig& cfg,
                                 const model::Forest* domain_forest) {
  mela::Featurizer ft;
  ft.res = &ctx.resources;
  ft.lexicon = &ctx.lexicon;
  ft.matcher = &ctx.matcher;
  ft.keywords = &ctx.keywords;
  ft.domain_forest = domain_forest;
  ft.normalize = cfg.normalize;
  return ft;
}

// Domain sub-classifier training set: every URL in a message contributes its
// domain vector under the message's label.
std::optional<model::Forest> train_domain_forest(const std::vector<Message>& messages,
                                                 const std::vector<int>& labels,
                                                 const ExperimentConfig& cfg,
                                                 const Context& ctx) {
  std::vector<std::vector<float>> rows;
  std::vector<int> domain_labels;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    auto ents = entity::extract_entities(messages[i].text, ctx.resources);
    for (const entity::Entity* url : ents.of_kind(entity::EntityKind::Url)) {
      entity::DomainParts parts;
      try {
        parts = entity::parse_domain(url->canonical, ctx.resources);
      } catch (const DataError&) {
        continue;
      }
      if (parts.registrable.empty()) continue;
      auto dv = mela::domain_features(parts.registrable, parts.tld, ctx.resources.tlds,
                                      ctx.matcher, parts.host);
      rows.emplace_back(dv.values.begin(), dv.values.end());
      domain_labels.push_back(labels[i]);
    }
  }
  bool has[2] = {false, false};
  for (int l : domain_labels) has[l] = true;
  if (!has[0] || !has[1]) return std::nullopt;  // sub-model needs both classes
  auto params = cfg.domain_forest;
  params.rng_seed = util::mix64(cfg.forest.rng_seed ^ 0xd0d0d0d0ULL);
  return model::train(model::SampleMatrix::dense(std::move(rows)), domain_labels, params,
                      mela::kDomainSchemaVersion);
}

std::vector<std::string> message_tokens(const Message& msg, const Context& ctx,
                                        const ExperimentConfig& cfg) {
  if (!cfg.normalize) return baseline::tokenize_basic(msg.text);
  auto norm = textnorm::normalize(msg.text, ctx.lexicon);
  return baseline::tokenize_basic(norm.normalized);
}

std::vector<std::string> baseline_names(const std::vector<std::string>& tokens,
                                        const ExperimentConfig& cfg) {
  if (cfg.features == FeatureSet::Ngram) return baseline::ngram_names(tokens, cfg.ngram_nmax);
  return baseline::osb_names(tokens, cfg.osb_n, cfg.osb_window);
}

std::string baseline_schema(const ExperimentConfig& cfg) {
  return to_string(cfg.features) + "-" + std::to_string(cfg.ngram_nmax) + "-" +
         std::to_string(cfg.osb_n) + "-" + std::to_string(cfg.osb_window);
}

}  // namespace

MessageModel train_message_model(const std::vector<Message>& messages,
                                 const std::vector<int>& labels, const ExperimentConfig& cfg,
                                 const Context& ctx) {
  if (messages.size() != labels.size())
    throw DataError("message/label count mismatch");

  MessageModel m;
  m.config = cfg;
  if (cfg.features == FeatureSet::Mela) {
    m.domain_forest = train_domain_forest(messages, labels, cfg, ctx);
    auto ft = make_featurizer(ctx, cfg, m.domain_forest ? &*m.domain_forest : nullptr);
    std::vector<std::vector<float>> rows;
    rows.reserve(messages.size());
    for (const auto& msg : messages) {
      auto r = ft.featurize(msg);
      rows.emplace_back(r.vector.values.begin(), r.vector.values.end());
    }
    m.forest = model::train(model::SampleMatrix::dense(std::move(rows)), labels, cfg.forest,
                            mela::kMessageSchemaVersion);
  } else {
    std::vector<std::vector<std::string>> docs;
    docs.reserve(messages.size());
    for (const auto& msg : messages)
      docs.push_back(baseline_names(message_tokens(msg, ctx, cfg), cfg));
    m.vocab = baseline::VocabModel::build(docs, cfg.vocab_cap, cfg.vocab_df_min);
    std::vector<std::vector<std::pair<int, float>>> rows;
    rows.reserve(docs.size());
    for (const auto& doc : docs) rows.push_back(baseline::featurize(doc, *m.vocab));
    m.forest = model::train(
        model::SampleMatrix::sparse(std::max<std::size_t>(m.vocab->size(), 1), std::move(rows)),
        labels, cfg.forest, baseline_schema(cfg));
  }
  return m;
}

double MessageModel::score(const Message& msg, const Context& ctx) const {
  if (config.features == FeatureSet::Mela) {
    auto ft = make_featurizer(ctx, config, domain_forest ? &*domain_forest : nullptr);
    auto r = ft.featurize(msg);
    return model::predict(forest,
                          std::span<const float>(r.vector.values.data(), r.vector.values.size()));
  }
  if (!vocab) throw SchemaError("baseline model is missing its vocabulary");
  auto row = baseline::featurize(baseline_names(message_tokens(msg, ctx, config), config), *vocab);
  return model::predict_sparse(forest, row);
}

int MessageModel::decide(const Message& msg, const Context& ctx) const {
  return model::decide(score(msg, ctx), config.costs);
}

void MessageModel::save(const std::filesystem::path& base) const {
  nlohmann::json j;
  j["kind"] = "message-model";
  j["version"] = 1;
  j["features"] = to_string(config.features);
  j["normalize"] = config.normalize;
  j["ngram_nmax"] = config.ngram_nmax;
  j["osb_n"] = config.osb_n;
  j["osb_window"] = config.osb_window;
  j["cost_fp"] = config.costs.cost_fp;
  j["cost_fn"] = config.costs.cost_fn;
  j["vocab_cap"] = config.vocab_cap;
  j["vocab_df_min"] = config.vocab_df_min;
  j["has_domain_forest"] = domain_forest.has_value();
  j["has_vocab"] = vocab.has_value();
  util::write_file(base, j.dump(2) + "\n");
  model::save(forest, base.string() + ".forest");
  if (domain_forest) model::save(*domain_forest, base.string() + ".domforest");
  if (vocab) vocab->save(base.string() + ".vocab");
}

MessageModel MessageModel::load(const std::filesystem::path& base) {
  nlohmann::json j;
  try {
    std::ifstream in(base);
    if (!in) throw DataError("cannot open model manifest " + base.string());
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad model manifest " + base.string() + ": " + e.what());
  }
  if (j.value("kind", "") != "message-model")
    throw SchemaError("not a message model manifest: " + base.string());
  MessageModel m;
  try {
    m.config.features = feature_set_from_string(j.at("features").get<std::string>());
    m.config.normalize = j.value("normalize", true);
    m.config.ngram_nmax = j.value("ngram_nmax", 2);
    m.config.osb_n = j.value("osb_n", 3);
    m.config.osb_window = j.value("osb_window", 4);
    m.config.costs.cost_fp = j.value("cost_fp", 1.0);
    m.config.costs.cost_fn = j.value("cost_fn", 1.0);
    m.config.vocab_cap = j.value("vocab_cap", 50000);
    m.config.vocab_df_min = j.value("vocab_df_min", 2);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad model manifest " + base.string() + ": " + e.what());
  }
  m.forest = model::load(base.string() + ".forest");
  if (j.value("has_domain_forest", false))
    m.domain_forest = model::load(base.string() + ".domforest");
  if (j.value("has_vocab", false))
    m.vocab = baseline::VocabModel::load(base.string() + ".vocab");
  return m;
}

eval::Report evaluate_messages(const std::vector<Message>& messages,
                               const std::vector<int>& labels, const ExperimentConfig& cfg,
                               const Context& ctx, int k, std::uint64_t seed) {
  auto fit_predict = [&](const std::vector<std::size_t>& train_idx,
                         const std::vector<std::size_t>& test_idx) {
    std::vector<Message> train_msgs;
    std::vector<int> train_labels;
    train_msgs.reserve(train_idx.size());
    for (auto i : train_idx) {
      train_msgs.push_back(messages[i]);
      train_labels.push_back(labels[i]);
    }
    auto m = train_message_model(train_msgs, train_labels, cfg, ctx);
    std::vector<int> decided;
    decided.reserve(test_idx.size());
    for (auto i : test_idx) decided.push_back(m.decide(messages[i], ctx));
    return decided;
  };
  return eval::kfold_cv(labels, k, seed, fit_predict, cfg.describe());
}

SenderVectors collect_sender_vectors(const std::vector<Message>& stream, const Context& ctx,
                                     const mpa::NetworkEncoder& encoder,
                                     const mpa::AggregatorConfig& aggcfg,
                                     const model::Forest* domain_forest) {
  ExperimentConfig mela_cfg;
  auto ft = make_featurizer(ctx, mela_cfg, domain_forest);
  mpa::Aggregator agg(aggcfg, &ft);
  SenderVectors out;
  std::unordered_set<std::string> seen;
  for (const auto& msg : stream) {
    auto window = agg.ingest(msg);
    if (!window) continue;
    if (!seen.insert(window->sender).second) continue;  // first window per sender
    out.senders.push_back(window->sender);
    out.vectors.push_back(mpa::mpa_features(*window, encoder, ctx.us_networks));
    out.window_ends.push_back(window->window_end);
  }
  return out;
}

mpa::NetworkEncoder build_network_encoder(const std::vector<Message>& stream) {
  // deterministic ids: sorted unique network names
  std::set<std::string> names;
  for (const auto& m : stream) {
    names.insert(util::to_lower(m.orig_network));
    names.insert(util::to_lower(m.dest_network));
  }
  mpa::NetworkEncoder enc;
  for (const auto& n : names)
    if (!n.empty()) enc.intern(n);
  return enc;
}

SenderModel train_sender_model(const std::vector<Message>& stream,
                               const std::unordered_map<std::string, int>& sender_labels,
                               const Context& ctx, const model::ForestParams& params,
                               const mpa::AggregatorConfig& aggcfg,
                               const model::CostMatrix& costs) {
  SenderModel sm;
  sm.encoder = build_network_encoder(stream);
  sm.costs = costs;
  auto vectors = collect_sender_vectors(stream, ctx, sm.encoder, aggcfg);
  std::vector<std::vector<float>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < vectors.senders.size(); ++i) {
    auto it = sender_labels.find(vectors.senders[i]);
    if (it == sender_labels.end())
      throw DataError("sender '" + vectors.senders[i] + "' has no label");
    rows.emplace_back(vectors.vectors[i].values.begin(), vectors.vectors[i].values.end());
    labels.push_back(it->second);
  }
  sm.forest =
      model::train(model::SampleMatrix::dense(std::move(rows)), labels, params, mpa::kSchemaVersion);
  return sm;
}

void SenderModel::save(const std::filesystem::path& base) const {
  nlohmann::json j;
  j["kind"] = "sender-model";
  j["version"] = 1;
  j["cost_fp"] = costs.cost_fp;
  j["cost_fn"] = costs.cost_fn;
  util::write_file(base, j.dump(2) + "\n");
  model::save(forest, base.string() + ".forest");
  encoder.save(base.string() + ".networks");
}

SenderModel SenderModel::load(const std::filesystem::path& base) {
  nlohmann::json j;
  try {
    std::ifstream in(base);
    if (!in) throw DataError("cannot open model manifest " + base.string());
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad model manifest " + base.string() + ": " + e.what());
  }
  if (j.value("kind", "") != "sender-model")
    throw SchemaError("not a sender model manifest: " + base.string());
  SenderModel sm;
  sm.costs.cost_fp = j.value("cost_fp", 1.0);
  sm.costs.cost_fn = j.value("cost_fn", 1.0);
  sm.forest = model::load(base.string() + ".forest");
  sm.encoder = mpa::NetworkEncoder::load(base.string() + ".networks");
  return sm;
}

void load_sms_collection(const std::filesystem::path& path, std::vector<Message>& messages,
                         std::vector<int>& labels) {
  auto lines = util::read_lines(path);
  std::int64_t ts = 1600000000;
  std::size_t n = 0;
  for (const auto& line : lines) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("collection line without tab separator: " + line.substr(0, 40));
    std::string label = line.substr(0, tab);
    int y;
    if (label == "ham") y = 0;
    else if (label == "spam") y = 1;
    else throw DataError("unknown label '" + label + "' in " + path.string());
    Message m;
    m.id = "c" + std::to_string(1000000 + n);
    m.timestamp = ts + static_cast<std::int64_t>(n);
    m.sender = "unknown";
    m.recipient = "unknown";
    m.text = line.substr(tab + 1);
    messages.push_back(std::move(m));
    labels.push_back(y);
    ++n;
  }
  if (messages.empty()) throw DataError("empty collection file: " + path.string());
}

}  // namespace smsguard::pipeline
