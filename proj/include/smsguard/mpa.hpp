#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "smsguard/mela.hpp"
#include "smsguard/message.hpp"

namespace smsguard::mpa {

inline constexpr std::size_t kFeatureCount = 60;
inline constexpr const char* kSchemaVersion = "mpa-1";

struct MpaVector {
  std::array<float, kFeatureCount> values{};
  std::string schema_version = kSchemaVersion;
};

// slot index -> name, fixed order
const std::vector<std::string>& schema();
int slot(const std::string& name);  // -1 if unknown

// Stable integer ids for network names; 0 is reserved for unknown.
struct NetworkEncoder {
  std::unordered_map<std::string, int> ids;  // name -> id >= 1

  int encode(const std::string& name) const;
  int intern(const std::string& name);  // assigns the next id if missing

  void save(const std::filesystem::path& path) const;
  static NetworkEncoder load(const std::filesystem::path& path);
};

std::unordered_set<std::string> load_us_networks(const std::filesystem::path& path);

// One sender's messages inside a 7-day span, ready for featurization. The
// first-message MELA vector survives eviction of the message itself.
struct SenderWindow {
  std::string sender;
  std::vector<Message> messages;  // sorted by timestamp
  std::int64_t window_start = 0;
  std::int64_t window_end = 0;
  mela::MelaVector first_message_mela;
};

// Mean per-position digit entropy (bits) over the last 7 right-aligned digit
// positions across unique recipients; short numbers are zero-padded.
double recipient_entropy(const std::vector<std::string>& recipients);

// messages per second with a 1-second floor on the window span
double sending_frequency(const SenderWindow& w);

MpaVector mpa_features(const SenderWindow& w, const NetworkEncoder& encoder,
                       const std::unordered_set<std::string>& us_networks);

struct AggregatorConfig {
  int min_messages = 50;
  int emit_stride = 50;       // new messages required between emissions
  std::int64_t window_span = 7 * 86400;
  std::int64_t max_skew = 60;  // out-of-order tolerance, seconds
};

// Single-writer per-sender sliding-window state machine. ingest() returns a
// window whenever a sender crosses the emission rule.
class Aggregator {
 public:
  Aggregator(AggregatorConfig cfg, const mela::Featurizer* featurizer);

  std::optional<SenderWindow> ingest(const Message& msg);

  const AggregatorConfig& config() const { return cfg_; }

 private:
  struct SenderState {
    std::vector<Message> window;  // sorted by timestamp
    std::optional<mela::MelaVector> first_mela;
    std::int64_t newest = 0;
    bool emitted = false;
    int since_emit = 0;  // messages accepted since the last emission
  };

  AggregatorConfig cfg_;
  const mela::Featurizer* featurizer_;
  std::unordered_map<std::string, SenderState> senders_;
};

}  // namespace smsguard::mpa
