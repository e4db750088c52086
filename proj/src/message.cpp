#include "smsguard/message.hpp"

#include <fstream>

#include <json.hpp>

#include "smsguard/util.hpp"

namespace smsguard {

using nlohmann::json;

Message message_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("bad JSONL record: ") + e.what());
  }
  Message m;
  try {
    m.id = j.at("id").get<std::string>();
    m.timestamp = j.at("ts").get<std::int64_t>();
    m.sender = j.at("sender").get<std::string>();
    m.recipient = j.at("recipient").get<std::string>();
    m.orig_network = j.value("orig_net", "");
    m.dest_network = j.value("dest_net", "");
    m.text = j.at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(std::string("bad JSONL record: ") + e.what());
  }
  return m;
}

std::string message_to_json_line(const Message& msg) {
  json j{{"id", msg.id},         {"ts", msg.timestamp},
         {"sender", msg.sender}, {"recipient", msg.recipient},
         {"orig_net", msg.orig_network}, {"dest_net", msg.dest_network},
         {"text", msg.text}};
  return j.dump();
}

std::vector<Message> read_messages_jsonl(const std::filesystem::path& path) {
  std::vector<Message> out;
  for (auto& line : util::read_lines(path)) {
    if (line.empty()) continue;
    out.push_back(message_from_json_line(line));
  }
  return out;
}

void write_messages_jsonl(const std::filesystem::path& path, const std::vector<Message>& msgs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  for (const auto& m : msgs) out << message_to_json_line(m) << "\n";
}

std::unordered_map<std::string, int> read_labels(const std::filesystem::path& path) {
  std::unordered_map<std::string, int> out;
  auto lines = util::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("bad label line " + std::to_string(i + 1) + " in " + path.string());
    std::string label = line.substr(tab + 1);
    int y;
    if (label == "ham") y = 0;
    else if (label == "spam") y = 1;
    else throw DataError("unknown label '" + label + "' at line " + std::to_string(i + 1));
    out[line.substr(0, tab)] = y;
  }
  return out;
}

void write_labels(const std::filesystem::path& path,
                  const std::vector<std::pair<std::string, int>>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  for (const auto& [id, y] : labels) out << id << "\t" << (y ? "spam" : "ham") << "\n";
}

}  // namespace smsguard
