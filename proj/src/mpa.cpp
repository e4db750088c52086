#include "smsguard/mpa.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "smsguard/util.hpp"

namespace smsguard::mpa {

namespace {

std::vector<std::string> build_schema() {
  std::vector<std::string> s = {
      "ORIG_NETWORK",           "DEST_NETWORK",
      "SENDER_NETWORK_IS_NOT_US", "DEST_NETWORK_IS_NOT_US",
      "NUM_OF_UNIQUE_RECIPIENTS", "RECIPIENT_NUMBER_ENTROPY",
      "NUM_OF_UNIQUE_DEST_NETWORKS", "SENDING_FREQUENCY",
      "NUM_OF_UNIQUE_MESSAGES"};
  for (std::size_t i = 0; i < mela::kMessageFeatureCount; ++i)
    s.push_back("MELA_FEATURE_" + std::to_string(i));
  return s;
}

}  // namespace

const std::vector<std::string>& schema() {
  static const std::vector<std::string> s = build_schema();
  return s;
}

int slot(const std::string& name) {
  const auto& s = schema();
  auto it = std::find(s.begin(), s.end(), name);
  return it == s.end() ? -1 : static_cast<int>(it - s.begin());
}

int NetworkEncoder::encode(const std::string& name) const {
  auto it = ids.find(util::to_lower(name));
  return it == ids.end() ? 0 : it->second;
}

int NetworkEncoder::intern(const std::string& name) {
  std::string key = util::to_lower(name);
  auto it = ids.find(key);
  if (it != ids.end()) return it->second;
  int id = static_cast<int>(ids.size()) + 1;
  ids.emplace(std::move(key), id);
  return id;
}

void NetworkEncoder::save(const std::filesystem::path& path) const {
  std::vector<std::string> by_id(ids.size() + 1);
  for (const auto& [name, id] : ids) by_id[static_cast<std::size_t>(id)] = name;
  std::ostringstream out;
  out << "networks\t1\n";
  for (std::size_t i = 1; i < by_id.size(); ++i) out << i << "\t" << by_id[i] << "\n";
  util::write_file(path, out.str());
}

NetworkEncoder NetworkEncoder::load(const std::filesystem::path& path) {
  auto lines = util::read_lines(path);
  if (lines.empty() || lines[0] != "networks\t1")
    throw DataError("unrecognized network dictionary: " + path.string());
  NetworkEncoder enc;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto tab = lines[i].find('\t');
    if (tab == std::string::npos)
      throw DataError("malformed network dictionary line " + std::to_string(i + 1));
    int id = std::stoi(lines[i].substr(0, tab));
    std::string name = lines[i].substr(tab + 1);
    if (id < 1 || !enc.ids.emplace(name, id).second)
      throw DataError("bad network id on line " + std::to_string(i + 1));
  }
  return enc;
}

std::unordered_set<std::string> load_us_networks(const std::filesystem::path& path) {
  auto entries = util::read_list_file(path);
  return {entries.begin(), entries.end()};
}

double recipient_entropy(const std::vector<std::string>& recipients) {
  if (recipients.empty()) throw DataError("recipient_entropy needs a non-empty list");
  std::set<std::string> unique;
  for (const auto& r : recipients) {
    std::string digits;
    for (char c : r)
      if (util::is_ascii_digit(c)) digits.push_back(c);
    unique.insert(std::move(digits));
  }

  const int positions = 7;
  double sum = 0.0;
  for (int p = 1; p <= positions; ++p) {  // p-th digit from the right
    int hist[10] = {0};
    int total = 0;
    for (const auto& d : unique) {
      char digit = '0';  // right-aligned; short numbers read as zero-padded
      if (static_cast<std::size_t>(p) <= d.size()) digit = d[d.size() - p];
      ++hist[digit - '0'];
      ++total;
    }
    double h = 0.0;
    for (int c : hist) {
      if (c == 0) continue;
      double prob = static_cast<double>(c) / total;
      h -= prob * std::log2(prob);
    }
    sum += h;
  }
  return sum / positions;
}

double sending_frequency(const SenderWindow& w) {
  auto span = std::max<std::int64_t>(w.window_end - w.window_start, 1);
  return static_cast<double>(w.messages.size()) / static_cast<double>(span);
}

MpaVector mpa_features(const SenderWindow& w, const NetworkEncoder& encoder,
                       const std::unordered_set<std::string>& us_networks) {
  if (w.messages.empty()) throw DataError("empty sender window");
  if (w.first_message_mela.schema_version != mela::kMessageSchemaVersion)
    throw SchemaError("sender window carries MELA schema '" +
                      w.first_message_mela.schema_version + "'");

  const Message& first = w.messages.front();
  auto is_us = [&](const std::string& net) {
    return us_networks.count(util::to_lower(net)) > 0;
  };

  std::set<std::string> recipients, dest_nets, texts;
  std::vector<std::string> recipient_list;
  for (const auto& m : w.messages) {
    recipients.insert(m.recipient);
    recipient_list.push_back(m.recipient);
    dest_nets.insert(util::to_lower(m.dest_network));
    texts.insert(util::collapse_whitespace(util::to_lower(m.text)));
  }

  MpaVector v;
  auto& f = v.values;
  std::size_t i = 0;
  f[i++] = static_cast<float>(encoder.encode(first.orig_network));
  f[i++] = static_cast<float>(encoder.encode(first.dest_network));
  f[i++] = is_us(first.orig_network) ? 0.0f : 1.0f;
  f[i++] = is_us(first.dest_network) ? 0.0f : 1.0f;
  f[i++] = static_cast<float>(recipients.size());
  f[i++] = static_cast<float>(recipient_entropy(recipient_list));
  f[i++] = static_cast<float>(dest_nets.size());
  f[i++] = static_cast<float>(sending_frequency(w));
  f[i++] = static_cast<float>(texts.size());
  for (float x : w.first_message_mela.values) f[i++] = x;
  return v;
}

Aggregator::Aggregator(AggregatorConfig cfg, const mela::Featurizer* featurizer)
    : cfg_(cfg), featurizer_(featurizer) {
  if (cfg_.min_messages < 1 || cfg_.emit_stride < 1 || cfg_.window_span < 1)
    throw DataError("invalid aggregator configuration");
}

std::optional<SenderWindow> Aggregator::ingest(const Message& msg) {
  if (msg.sender.empty() || msg.recipient.empty() || msg.timestamp <= 0)
    throw DataError("message " + msg.id + " is missing sender, recipient or timestamp");

  SenderState& st = senders_[msg.sender];
  if (st.newest != 0 && msg.timestamp < st.newest - cfg_.max_skew)
    throw DataError("message " + msg.id + " regresses more than " +
                    std::to_string(cfg_.max_skew) + "s behind sender '" + msg.sender + "'");

  if (!st.first_mela && featurizer_ != nullptr)
    st.first_mela = featurizer_->featurize(msg).vector;

  // insert keeping timestamp order (late arrivals within the skew re-sort)
  auto pos = std::upper_bound(
      st.window.begin(), st.window.end(), msg.timestamp,
      [](std::int64_t ts, const Message& m) { return ts < m.timestamp; });
  st.window.insert(pos, msg);
  st.newest = std::max(st.newest, msg.timestamp);
  ++st.since_emit;

  // evict anything older than the span, measured from the newest message
  auto cutoff = st.newest - cfg_.window_span;
  auto keep_from = std::lower_bound(
      st.window.begin(), st.window.end(), cutoff,
      [](const Message& m, std::int64_t ts) { return m.timestamp < ts; });
  st.window.erase(st.window.begin(), keep_from);

  if (static_cast<int>(st.window.size()) < cfg_.min_messages) return std::nullopt;
  if (st.emitted && st.since_emit < cfg_.emit_stride) return std::nullopt;

  SenderWindow w;
  w.sender = msg.sender;
  w.messages = st.window;
  w.window_start = st.window.front().timestamp;
  w.window_end = st.window.back().timestamp;
  if (st.first_mela) w.first_message_mela = *st.first_mela;
  st.emitted = true;
  st.since_emit = 0;
  return w;
}

}  // namespace smsguard::mpa
