#include "smsguard/baseline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "smsguard/util.hpp"

namespace smsguard::baseline {

using util::is_ascii_alnum;
using util::is_ascii_alpha;

std::vector<std::string> tokenize_basic(const std::string& text) {
  std::string lower = util::to_lower(text);
  const std::size_t n = lower.size();

  // length of the alnum run starting/ending at each byte
  auto run_left = [&](std::size_t i) {  // run ending at i inclusive
    std::size_t len = 0;
    for (std::size_t j = i;; --j) {
      if (!is_ascii_alnum(lower[j])) break;
      ++len;
      if (j == 0) break;
    }
    return len;
  };
  auto run_right = [&](std::size_t i) {  // run starting at i inclusive
    std::size_t len = 0;
    while (i + len < n && is_ascii_alnum(lower[i + len])) ++len;
    return len;
  };

  std::vector<std::string> tokens;
  std::string cur;
  for (std::size_t i = 0; i < n; ++i) {
    char c = lower[i];
    if (is_ascii_alnum(c)) {
      cur.push_back(c);
      continue;
    }
    bool joiner = false;
    if (c == '.' && i > 0 && i + 1 < n && is_ascii_alpha(lower[i - 1]) &&
        is_ascii_alpha(lower[i + 1])) {
      joiner = run_left(i - 1) >= 2 && run_right(i + 1) >= 2;
    }
    if (joiner) {
      cur.push_back('.');
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

VocabModel VocabModel::build(const std::vector<std::vector<std::string>>& docs, int cap,
                             int df_min) {
  std::unordered_map<std::string, int> df;
  for (const auto& doc : docs) {
    std::unordered_map<std::string, bool> seen;
    for (const auto& name : doc) {
      if (!seen.emplace(name, true).second) continue;
      ++df[name];
    }
  }
  std::vector<std::pair<std::string, int>> kept;
  kept.reserve(df.size());
  for (auto& [name, count] : df)
    if (count >= df_min) kept.emplace_back(name, count);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (cap >= 0 && kept.size() > static_cast<std::size_t>(cap)) kept.resize(cap);

  VocabModel v;
  v.cap = cap;
  v.df_min = df_min;
  v.index.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i)
    v.index.emplace(kept[i].first, static_cast<int>(i));
  return v;
}

void VocabModel::save(const std::filesystem::path& path) const {
  std::vector<std::string> by_index(index.size());
  for (const auto& [name, i] : index) by_index[static_cast<std::size_t>(i)] = name;
  std::ostringstream out;
  out << "vocab\t1\t" << cap << "\t" << df_min << "\n";
  for (const auto& name : by_index) out << name << "\n";
  util::write_file(path, out.str());
}

VocabModel VocabModel::load(const std::filesystem::path& path) {
  auto lines = util::read_lines(path);
  if (lines.empty() || lines[0].rfind("vocab\t1\t", 0) != 0)
    throw DataError("unrecognized vocab file: " + path.string());
  std::istringstream header(lines[0]);
  std::string tag;
  int version = 0;
  VocabModel v;
  header >> tag >> version >> v.cap >> v.df_min;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (!v.index.emplace(lines[i], static_cast<int>(i - 1)).second)
      throw DataError("duplicate vocab entry '" + lines[i] + "' in " + path.string());
  }
  return v;
}

std::vector<std::string> ngram_names(const std::vector<std::string>& tokens, int n_max) {
  std::vector<std::string> names;
  const std::size_t len = tokens.size();
  for (std::size_t i = 0; i < len; ++i) {
    std::string gram;
    for (std::size_t n = 0; n < static_cast<std::size_t>(n_max) && i + n < len; ++n) {
      if (n > 0) gram.push_back('_');
      gram += tokens[i + n];
      names.push_back(gram);
    }
  }
  return names;
}

namespace {

void osb_recurse(const std::vector<std::string>& tokens, int n, int window,
                 std::vector<std::size_t>& picked, std::size_t next,
                 std::vector<std::string>& out) {
  if (static_cast<int>(picked.size()) == n) {
    // name: tokens interleaved with gap sizes, e.g. "a<1>b<2>c"
    std::string name = tokens[picked[0]];
    for (std::size_t k = 1; k < picked.size(); ++k) {
      name += "<" + std::to_string(picked[k] - picked[k - 1]) + ">";
      name += tokens[picked[k]];
    }
    out.push_back(std::move(name));
    return;
  }
  std::size_t first = picked.front();
  for (std::size_t i = next; i < tokens.size(); ++i) {
    if (i - first > static_cast<std::size_t>(window)) break;
    picked.push_back(i);
    osb_recurse(tokens, n, window, picked, i + 1, out);
    picked.pop_back();
  }
}

}  // namespace

std::vector<std::string> osb_names(const std::vector<std::string>& tokens, int n, int window) {
  if (n < 2) throw DataError("osb tuple size must be >= 2");
  std::vector<std::string> names;
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    picked.assign(1, i);
    osb_recurse(tokens, n, window, picked, i + 1, names);
  }
  return names;
}

std::vector<std::pair<int, float>> featurize(const std::vector<std::string>& names,
                                             const VocabModel& vocab) {
  std::map<int, float> counts;
  for (const auto& name : names) {
    auto it = vocab.index.find(name);
    if (it != vocab.index.end()) counts[it->second] += 1.0f;
  }
  return {counts.begin(), counts.end()};
}

std::vector<std::pair<int, float>> ngram_features(const std::vector<std::string>& tokens,
                                                  int n_max, const VocabModel& vocab) {
  return featurize(ngram_names(tokens, n_max), vocab);
}

std::vector<std::pair<int, float>> osb_features(const std::vector<std::string>& tokens, int n,
                                                int window, const VocabModel& vocab) {
  return featurize(osb_names(tokens, n, window), vocab);
}

}  // namespace smsguard::baseline
