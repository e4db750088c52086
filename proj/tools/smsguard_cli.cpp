#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <unordered_set>

#include <CLI11.hpp>
#include <json.hpp>

#include "smsguard/pipeline.hpp"
#include "smsguard/simgen.hpp"
#include "smsguard/util.hpp"

using namespace smsguard;

namespace {

struct CliConfig {
  std::filesystem::path data_dir = "data";
  pipeline::ExperimentConfig experiment;
  mpa::AggregatorConfig aggregator;
  std::uint64_t seed = 1;
};

// single key-value config file: `key = value`, '#' comments; unknown keys
// are rejected so typos fail loudly
void apply_config_file(CliConfig& cfg, const std::filesystem::path& path) {
  for (const auto& raw : util::read_lines(path)) {
    std::string line = raw;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("config line without '=': " + raw);
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto as_int = [&] { return std::stoll(value); };
    auto as_double = [&] { return std::stod(value); };
    if (key == "data_dir") cfg.data_dir = value;
    else if (key == "n_trees") cfg.experiment.forest.n_trees = static_cast<int>(as_int());
    else if (key == "domain_trees") cfg.experiment.domain_forest.n_trees = static_cast<int>(as_int());
    else if (key == "max_depth") cfg.experiment.forest.max_depth = static_cast<int>(as_int());
    else if (key == "min_leaf") cfg.experiment.forest.min_leaf = static_cast<int>(as_int());
    else if (key == "mtry") cfg.experiment.forest.features_per_split = static_cast<int>(as_int());
    else if (key == "bootstrap") cfg.experiment.forest.bootstrap = as_int() != 0;
    else if (key == "threads") cfg.experiment.forest.n_threads = static_cast<int>(as_int());
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_int());
    else if (key == "cost_fp") cfg.experiment.costs.cost_fp = as_double();
    else if (key == "cost_fn") cfg.experiment.costs.cost_fn = as_double();
    else if (key == "vocab_cap") cfg.experiment.vocab_cap = static_cast<int>(as_int());
    else if (key == "df_min") cfg.experiment.vocab_df_min = static_cast<int>(as_int());
    else if (key == "ngram_nmax") cfg.experiment.ngram_nmax = static_cast<int>(as_int());
    else if (key == "osb_n") cfg.experiment.osb_n = static_cast<int>(as_int());
    else if (key == "osb_window") cfg.experiment.osb_window = static_cast<int>(as_int());
    else if (key == "min_messages") cfg.aggregator.min_messages = static_cast<int>(as_int());
    else if (key == "emit_stride") cfg.aggregator.emit_stride = static_cast<int>(as_int());
    else if (key == "window_days") cfg.aggregator.window_span = as_int() * 86400;
    else if (key == "max_skew") cfg.aggregator.max_skew = as_int();
    else throw DataError("unknown config key '" + key + "' in " + path.string());
  }
}

std::string effective_fingerprint(const CliConfig& cfg) {
  std::ostringstream desc;
  desc << cfg.experiment.describe() << ";data=" << cfg.data_dir.string()
       << ";min_messages=" << cfg.aggregator.min_messages
       << ";emit_stride=" << cfg.aggregator.emit_stride
       << ";window_span=" << cfg.aggregator.window_span;
  return eval::config_fingerprint(desc.str(), cfg.seed);
}

void read_corpus(const std::filesystem::path& corpus, const std::filesystem::path& labels_path,
                 std::vector<Message>& messages, std::vector<int>& labels) {
  messages = read_messages_jsonl(corpus);
  auto label_map = read_labels(labels_path);
  labels.reserve(messages.size());
  for (const auto& m : messages) {
    auto it = label_map.find(m.id);
    if (it == label_map.end()) throw DataError("message '" + m.id + "' has no label");
    labels.push_back(it->second);
  }
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-")
    std::cout << content;
  else
    util::write_file(out_path, content);
}

int run(int argc, char** argv) {
  CLI::App app{"short-text spam detection toolkit"};
  app.require_subcommand(0, 1);

  CliConfig cfg;
  cfg.experiment.forest.rng_seed = cfg.seed;
  std::string config_path;
  bool print_fingerprint = false;
  app.add_option("--config", config_path, "key-value config file");
  app.add_option("--data-dir", cfg.data_dir, "bundled data directory");
  app.add_flag("--print-config-fingerprint", print_fingerprint,
               "print the fingerprint embedded in reports/models and exit");

  // shared experiment options
  std::string features = "mela", normalize = "on", costs = "1,1";
  std::uint64_t seed_flag = 0;
  bool seed_set = false;
  int n_trees = 0;
  auto add_experiment_flags = [&](CLI::App* sub) {
    sub->add_option("--features", features, "mela|ngram|sgram");
    sub->add_option("--normalize", normalize, "on|off");
    sub->add_option("--costs", costs, "cost_fp,cost_fn");
    sub->add_option("--trees", n_trees, "forest size override");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& v) { seed_flag = v; seed_set = true; }, "rng seed");
  };

  // ---- mine-clusters ----
  auto* mine = app.add_subcommand("mine-clusters", "propose substring clusters from a corpus");
  std::string mine_corpus, mine_out = "-";
  int mine_top_k = 60, mine_min_len = 3, mine_k = 22;
  mine->add_option("corpus", mine_corpus)->required();
  mine->add_option("--top-k", mine_top_k);
  mine->add_option("--min-len", mine_min_len);
  mine->add_option("--k", mine_k);
  mine->add_option("--out", mine_out);

  // ---- validate-clusters ----
  auto* validate = app.add_subcommand("validate-clusters", "re-check a cluster file");
  std::string validate_path;
  int validate_k = -1;
  validate->add_option("file", validate_path)->required();
  validate->add_option("--k", validate_k);

  // ---- train-domain ----
  auto* traindom = app.add_subcommand("train-domain", "train the URL domain sub-classifier");
  std::string traindom_csv, traindom_out;
  traindom->add_option("domains", traindom_csv)->required();
  traindom->add_option("--out", traindom_out)->required();
  add_experiment_flags(traindom);

  // ---- train-message ----
  auto* trainmsg = app.add_subcommand("train-message", "train a message classifier");
  std::string trainmsg_corpus, trainmsg_labels, trainmsg_out;
  trainmsg->add_option("corpus", trainmsg_corpus)->required();
  trainmsg->add_option("--labels", trainmsg_labels)->required();
  trainmsg->add_option("--out", trainmsg_out)->required();
  add_experiment_flags(trainmsg);

  // ---- train-sender ----
  auto* trainsnd = app.add_subcommand("train-sender", "train the MPA sender classifier");
  std::string trainsnd_stream, trainsnd_labels, trainsnd_out;
  trainsnd->add_option("stream", trainsnd_stream)->required();
  trainsnd->add_option("--labels", trainsnd_labels)->required();
  trainsnd->add_option("--out", trainsnd_out)->required();
  add_experiment_flags(trainsnd);

  // ---- classify ----
  auto* classify = app.add_subcommand("classify", "score a corpus with a trained model");
  std::string classify_corpus, classify_model, classify_out = "-";
  classify->add_option("corpus", classify_corpus)->required();
  classify->add_option("--model", classify_model)->required();
  classify->add_option("--out", classify_out);
  add_experiment_flags(classify);

  // ---- score-senders ----
  auto* score = app.add_subcommand("score-senders", "emit window verdicts from a stream");
  std::string score_stream, score_model, score_out = "-";
  score->add_option("stream", score_stream, "jsonl stream or - for stdin")->required();
  score->add_option("--model", score_model)->required();
  score->add_option("--out", score_out);

  // ---- evaluate ----
  auto* evaluate = app.add_subcommand("evaluate", "k-fold cross-validation report");
  std::string eval_corpus, eval_labels, eval_out = "-";
  int eval_k = 10;
  bool eval_machine = false;
  evaluate->add_option("corpus", eval_corpus)->required();
  evaluate->add_option("--labels", eval_labels)->required();
  evaluate->add_option("--k", eval_k);
  evaluate->add_option("--out", eval_out);
  evaluate->add_flag("--machine", eval_machine, "line-oriented metric records");
  add_experiment_flags(evaluate);

  // ---- replay ----
  auto* replay = app.add_subcommand("replay", "frozen-model temporal replay over a stream");
  std::string replay_stream, replay_labels, replay_model, replay_out = "-";
  int replay_bucket_weeks = 1;
  double replay_delta = 0.05;
  replay->add_option("stream", replay_stream)->required();
  replay->add_option("--labels", replay_labels)->required();
  replay->add_option("--model", replay_model)->required();
  replay->add_option("--bucket-weeks", replay_bucket_weeks);
  replay->add_option("--drift-delta", replay_delta);
  replay->add_option("--out", replay_out);

  // ---- gen-corpus ----
  auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus or stream");
  std::string gen_config, gen_out, gen_labels_out;
  bool gen_stream = false;
  gen->add_option("genconfig", gen_config)->required();
  gen->add_option("--out", gen_out)->required();
  gen->add_option("--labels-out", gen_labels_out)->required();
  gen->add_flag("--stream", gen_stream, "generate sender streams instead of a corpus");

  // ---- extract ----
  auto* extract = app.add_subcommand("extract", "dump feature matrices as CSV");
  std::string extract_corpus, extract_what = "mela", extract_out = "-", extract_schema_out;
  extract->add_option("corpus", extract_corpus)->required();
  extract->add_option("--what", extract_what, "mela|domain|mpa");
  extract->add_option("--out", extract_out);
  extract->add_option("--schema-out", extract_schema_out, "write slot index -> name listing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // stable usage-error contract
  }

  if (!config_path.empty()) apply_config_file(cfg, config_path);
  if (seed_set) cfg.seed = seed_flag;
  cfg.experiment.features = pipeline::feature_set_from_string(features);
  if (normalize != "on" && normalize != "off")
    throw DataError("--normalize expects on|off");
  cfg.experiment.normalize = normalize == "on";
  {
    auto comma = costs.find(',');
    if (comma == std::string::npos) throw DataError("--costs expects cost_fp,cost_fn");
    cfg.experiment.costs.cost_fp = std::stod(costs.substr(0, comma));
    cfg.experiment.costs.cost_fn = std::stod(costs.substr(comma + 1));
  }
  if (n_trees > 0) cfg.experiment.forest.n_trees = n_trees;
  cfg.experiment.forest.rng_seed = cfg.seed;

  if (print_fingerprint) {
    std::cout << effective_fingerprint(cfg) << "\n";
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 1;
  }

  auto ctx = [&] { return pipeline::Context::load(cfg.data_dir); };

  if (*mine) {
    auto messages = read_messages_jsonl(mine_corpus);
    std::vector<std::string> texts;
    texts.reserve(messages.size());
    for (const auto& m : messages) texts.push_back(m.text);
    auto c = ctx();
    auto mined = cluster::mine_substrings(texts, c.resources.common_words, mine_top_k,
                                          mine_min_len);
    if (mined.empty()) throw DataError("no substrings mined; corpus too small?");
    // document co-occurrence for the clustering similarity
    std::vector<std::vector<double>> cooc(mined.size(),
                                          std::vector<double>(mined.size(), 0.0));
    for (const auto& text : texts) {
      std::string lower = util::to_lower(text);
      std::vector<std::size_t> present;
      for (std::size_t i = 0; i < mined.size(); ++i)
        if (lower.find(mined[i].substring) != std::string::npos) present.push_back(i);
      for (std::size_t a : present)
        for (std::size_t b : present)
          if (a != b) cooc[a][b] += 1.0;
    }
    auto proposals = cluster::cluster_candidates(mined, cooc, mine_k);
    std::ostringstream out;
    out << "version: mined-" << eval::config_fingerprint("mine", cfg.seed) << "\n";
    for (std::size_t i = 0; i < proposals.size(); ++i) {
      out << "[cluster_" << i << "]\n";
      for (std::size_t m = 0; m < proposals[i].members.size(); ++m)
        out << proposals[i].members[m] << "  # support " << proposals[i].support[m] << "\n";
    }
    write_output(mine_out, out.str());
    return 0;
  }

  if (*validate) {
    auto set = cluster::ClusterSet::load(validate_path);
    set.validate(validate_k);
    std::cout << "ok: " << set.size() << " clusters\n";
    return 0;
  }

  if (*traindom) {
    auto c = ctx();
    std::vector<std::vector<float>> rows;
    std::vector<int> labels;
    for (const auto& line : util::read_lines(traindom_csv)) {
      if (line.empty() || line[0] == '#') continue;
      auto comma = line.find(',');
      if (comma == std::string::npos)
        throw DataError("domains csv line without comma: " + line);
      std::string domain = line.substr(0, comma);
      std::string label = line.substr(comma + 1);
      int y;
      if (label == "ham") y = 0;
      else if (label == "spam") y = 1;
      else throw DataError("unknown label '" + label + "'");
      auto parts = entity::parse_domain(domain, c.resources);
      auto dv = mela::domain_features(parts.registrable, parts.tld, c.resources.tlds, c.matcher,
                                      parts.host);
      rows.emplace_back(dv.values.begin(), dv.values.end());
      labels.push_back(y);
    }
    auto params = cfg.experiment.domain_forest;
    params.rng_seed = cfg.seed;
    auto forest = model::train(model::SampleMatrix::dense(std::move(rows)), labels, params,
                               mela::kDomainSchemaVersion);
    model::save(forest, traindom_out);
    std::cout << "oob_accuracy=" << forest.oob_accuracy << "\n";
    return 0;
  }

  if (*trainmsg) {
    std::vector<Message> messages;
    std::vector<int> labels;
    read_corpus(trainmsg_corpus, trainmsg_labels, messages, labels);
    auto c = ctx();
    auto m = pipeline::train_message_model(messages, labels, cfg.experiment, c);
    m.save(trainmsg_out);
    std::cout << "trained on " << messages.size()
              << " messages, oob_accuracy=" << m.forest.oob_accuracy << "\n";
    return 0;
  }

  if (*trainsnd) {
    auto stream = read_messages_jsonl(trainsnd_stream);
    auto label_map = read_labels(trainsnd_labels);
    auto c = ctx();
    auto sm = pipeline::train_sender_model(stream, label_map, c, cfg.experiment.forest,
                                           cfg.aggregator, cfg.experiment.costs);
    sm.save(trainsnd_out);
    std::cout << "oob_accuracy=" << sm.forest.oob_accuracy << "\n";
    return 0;
  }

  if (*classify) {
    auto messages = read_messages_jsonl(classify_corpus);
    auto c = ctx();
    auto m = pipeline::MessageModel::load(classify_model);
    m.config.costs = cfg.experiment.costs;
    std::ostringstream out;
    for (const auto& msg : messages) {
      double s = m.score(msg, c);
      nlohmann::json j;
      j["id"] = msg.id;
      j["score"] = s;
      j["label"] = model::decide(s, m.config.costs) == 1 ? "spam" : "ham";
      out << j.dump() << "\n";
    }
    write_output(classify_out, out.str());
    return 0;
  }

  if (*score) {
    auto c = ctx();
    auto sm = pipeline::SenderModel::load(score_model);
    mela::Featurizer ft;
    ft.res = &c.resources;
    ft.lexicon = &c.lexicon;
    ft.matcher = &c.matcher;
    ft.keywords = &c.keywords;
    mpa::Aggregator agg(cfg.aggregator, &ft);
    std::ostream* out = &std::cout;
    std::ofstream file_out;
    if (score_out != "-") {
      file_out.open(score_out);
      out = &file_out;
    }
    auto handle = [&](const Message& msg) {
      auto window = agg.ingest(msg);
      if (!window) return;
      auto v = mpa::mpa_features(*window, sm.encoder, c.us_networks);
      double s = model::predict(
          sm.forest, std::span<const float>(v.values.data(), v.values.size()));
      nlohmann::json j;
      j["sender"] = window->sender;
      j["window_start"] = window->window_start;
      j["window_end"] = window->window_end;
      j["messages"] = window->messages.size();
      j["score"] = s;
      j["label"] = model::decide(s, sm.costs) == 1 ? "spam" : "ham";
      (*out) << j.dump() << "\n" << std::flush;
    };
    if (score_stream == "-") {
      std::string line;
      while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        handle(message_from_json_line(line));
      }
    } else {
      for (const auto& msg : read_messages_jsonl(score_stream)) handle(msg);
    }
    return 0;
  }

  if (*evaluate) {
    std::vector<Message> messages;
    std::vector<int> labels;
    read_corpus(eval_corpus, eval_labels, messages, labels);
    auto c = ctx();
    auto report =
        pipeline::evaluate_messages(messages, labels, cfg.experiment, c, eval_k, cfg.seed);
    write_output(eval_out, eval_machine ? report.machine_lines() : report.text());
    return 0;
  }

  if (*replay) {
    auto stream = read_messages_jsonl(replay_stream);
    auto label_map = read_labels(replay_labels);
    auto c = ctx();
    auto sm = pipeline::SenderModel::load(replay_model);
    auto vectors = pipeline::collect_sender_vectors(stream, c, sm.encoder, cfg.aggregator);
    std::vector<std::int64_t> ts;
    std::vector<int> truths, decisions;
    for (std::size_t i = 0; i < vectors.senders.size(); ++i) {
      auto it = label_map.find(vectors.senders[i]);
      if (it == label_map.end())
        throw DataError("sender '" + vectors.senders[i] + "' has no label");
      const auto& v = vectors.vectors[i];
      double s = model::predict(
          sm.forest, std::span<const float>(v.values.data(), v.values.size()));
      ts.push_back(vectors.window_ends[i]);
      truths.push_back(it->second);
      decisions.push_back(model::decide(s, sm.costs));
    }
    // windows surface in stream order; emission timestamps are already sorted
    auto series = eval::temporal_replay(ts, truths, decisions,
                                        static_cast<std::int64_t>(replay_bucket_weeks) * 604800,
                                        replay_delta, "replay", cfg.seed);
    write_output(replay_out, series.csv());
    return 0;
  }

  if (*gen) {
    auto c = ctx();
    auto pools = simgen::Pools::load(cfg.data_dir, c.lexicon);
    std::vector<Message> messages;
    std::vector<std::pair<std::string, int>> labels;
    if (gen_stream) {
      auto scfg = simgen::StreamConfig::defaults();
      scfg.seed = cfg.seed;
      auto stream = simgen::gen_sender_streams(scfg, pools);
      messages = std::move(stream.messages);
      for (const auto& [sender, label] : stream.sender_labels)
        labels.emplace_back(sender, label);
      std::sort(labels.begin(), labels.end());
    } else {
      auto gcfg = simgen::GenConfig::load(gen_config);
      auto corpus = simgen::gen_messages(gcfg, pools);
      messages = std::move(corpus.messages);
      for (std::size_t i = 0; i < messages.size(); ++i)
        labels.emplace_back(messages[i].id, corpus.labels[i]);
    }
    write_messages_jsonl(gen_out, messages);
    write_labels(gen_labels_out, labels);
    std::cout << "wrote " << messages.size() << " messages\n";
    return 0;
  }

  if (*extract) {
    auto c = ctx();
    std::ostringstream out, schema_out;
    auto csv_header = [&](const std::vector<std::string>& names) {
      out << "id";
      for (const auto& n : names) out << "," << n;
      out << "\n";
      for (std::size_t i = 0; i < names.size(); ++i)
        schema_out << i << "\t" << names[i] << "\n";
    };
    if (extract_what == "mela") {
      auto messages = read_messages_jsonl(extract_corpus);
      csv_header(mela::message_schema());
      mela::Featurizer ft;
      ft.res = &c.resources;
      ft.lexicon = &c.lexicon;
      ft.matcher = &c.matcher;
      ft.keywords = &c.keywords;
      for (const auto& msg : messages) {
        auto r = ft.featurize(msg);
        out << msg.id;
        for (float v : r.vector.values) out << "," << v;
        out << "\n";
      }
    } else if (extract_what == "domain") {
      csv_header(mela::domain_schema());
      for (const auto& line : util::read_lines(extract_corpus)) {
        if (line.empty() || line[0] == '#') continue;
        std::string domain = line.substr(0, line.find(','));
        auto parts = entity::parse_domain(domain, c.resources);
        auto dv = mela::domain_features(parts.registrable, parts.tld, c.resources.tlds,
                                        c.matcher, parts.host);
        out << domain;
        for (float v : dv.values) out << "," << v;
        out << "\n";
      }
    } else if (extract_what == "mpa") {
      auto stream = read_messages_jsonl(extract_corpus);
      csv_header(mpa::schema());
      auto encoder = pipeline::build_network_encoder(stream);
      auto vectors = pipeline::collect_sender_vectors(stream, c, encoder, cfg.aggregator);
      for (std::size_t i = 0; i < vectors.senders.size(); ++i) {
        out << vectors.senders[i];
        for (float v : vectors.vectors[i].values) out << "," << v;
        out << "\n";
      }
    } else {
      throw DataError("--what expects mela|domain|mpa");
    }
    write_output(extract_out, out.str());
    if (!extract_schema_out.empty()) util::write_file(extract_schema_out, schema_out.str());
    return 0;
  }

  std::cerr << app.help();
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
