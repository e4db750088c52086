#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace smsguard {

// One short text message with routing metadata.
struct Message {
  std::string id;
  std::int64_t timestamp = 0;  // seconds since epoch
  std::string sender;
  std::string recipient;
  std::string orig_network;
  std::string dest_network;
  std::string text;
};

// JSONL schema: {"id":..,"ts":..,"sender":..,"recipient":..,
//                "orig_net":..,"dest_net":..,"text":..}
Message message_from_json_line(const std::string& line);
std::string message_to_json_line(const Message& msg);
std::vector<Message> read_messages_jsonl(const std::filesystem::path& path);
void write_messages_jsonl(const std::filesystem::path& path, const std::vector<Message>& msgs);

// Sidecar labels: `id<TAB>ham|spam`, one per line.
std::unordered_map<std::string, int> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path,
                  const std::vector<std::pair<std::string, int>>& labels);

}  // namespace smsguard
