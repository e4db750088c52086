#include "smsguard/cluster.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "smsguard/util.hpp"

namespace smsguard::cluster {

using util::to_lower;

void ClusterSet::validate(int expected_k) const {
  if (expected_k >= 0 && static_cast<int>(clusters.size()) != expected_k)
    throw DataError("cluster set has " + std::to_string(clusters.size()) +
                    " clusters, expected " + std::to_string(expected_k));
  std::unordered_set<std::string> seen;
  for (const auto& [name, subs] : clusters) {
    if (name.empty()) throw DataError("cluster with empty name");
    if (subs.empty()) throw DataError("cluster '" + name + "' has no substrings");
    for (const auto& s : subs) {
      if (s.size() < 3)
        throw DataError("substring '" + s + "' in cluster '" + name + "' shorter than 3");
      if (!seen.insert(s).second)
        throw DataError("substring '" + s + "' appears in two clusters");
    }
  }
}

ClusterSet ClusterSet::load(const std::filesystem::path& path) {
  ClusterSet set;
  set.version = "unversioned";
  std::string current;
  for (auto& line : util::read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("version:", 0) == 0) {
      set.version = util::collapse_whitespace(line.substr(8));
      continue;
    }
    if (line.front() == '[') {
      auto close = line.find(']');
      if (close == std::string::npos) throw DataError("unterminated section header: " + line);
      current = line.substr(1, close - 1);
      set.clusters.emplace_back(current, std::vector<std::string>{});
      continue;
    }
    if (line[0] == '-') continue;  // pruned entry
    if (current.empty()) throw DataError("substring before any [section]: " + line);
    set.clusters.back().second.push_back(to_lower(util::collapse_whitespace(line)));
  }
  return set;
}

void ClusterSet::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  out << "version: " << version << "\n";
  for (const auto& [name, subs] : clusters) {
    out << "[" << name << "]\n";
    for (const auto& s : subs) out << s << "\n";
  }
  util::write_file(path, out.str());
}

ClusterMatcher::ClusterMatcher(const ClusterSet& set) {
  set.validate(-1);
  num_clusters_ = set.clusters.size();

  // trie
  states_.emplace_back();
  states_[0].next.assign(256, 0);
  std::vector<std::vector<int>> children(1, std::vector<int>(256, -1));
  int pattern_index = 0;
  for (std::size_t c = 0; c < set.clusters.size(); ++c) {
    for (const auto& pat : set.clusters[c].second) {
      int s = 0;
      for (unsigned char ch : to_lower(pat)) {
        if (children[static_cast<std::size_t>(s)][ch] < 0) {
          children[static_cast<std::size_t>(s)][ch] = static_cast<int>(states_.size());
          states_.emplace_back();
          children.emplace_back(256, -1);
        }
        s = children[static_cast<std::size_t>(s)][ch];
      }
      states_[static_cast<std::size_t>(s)].out.push_back(pattern_index);
      pattern_cluster_.push_back(static_cast<int>(c));
      ++pattern_index;
    }
  }

  // BFS: goto function + failure + dict-suffix links
  std::vector<int> fail(states_.size(), 0);
  std::deque<int> queue;
  for (int ch = 0; ch < 256; ++ch) {
    int child = children[0][static_cast<std::size_t>(ch)];
    if (child < 0) {
      states_[0].next[static_cast<std::size_t>(ch)] = 0;
    } else {
      states_[0].next[static_cast<std::size_t>(ch)] = child;
      fail[static_cast<std::size_t>(child)] = 0;
      queue.push_back(child);
    }
  }
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    auto& st = states_[static_cast<std::size_t>(s)];
    int f = fail[static_cast<std::size_t>(s)];
    st.dict_suffix = states_[static_cast<std::size_t>(f)].out.empty()
                         ? states_[static_cast<std::size_t>(f)].dict_suffix
                         : f;
    st.next.assign(256, 0);
    for (int ch = 0; ch < 256; ++ch) {
      int child = children[static_cast<std::size_t>(s)][static_cast<std::size_t>(ch)];
      if (child < 0) {
        st.next[static_cast<std::size_t>(ch)] =
            states_[static_cast<std::size_t>(f)].next[static_cast<std::size_t>(ch)];
      } else {
        st.next[static_cast<std::size_t>(ch)] = child;
        fail[static_cast<std::size_t>(child)] = states_[static_cast<std::size_t>(f)]
                                                    .next[static_cast<std::size_t>(ch)];
        queue.push_back(child);
      }
    }
  }
}

ClusterMatcher::CountResult ClusterMatcher::count_with_stats(std::string_view text) const {
  CountResult result;
  result.counts.assign(num_clusters_, 0);
  int s = 0;
  for (char raw : text) {
    unsigned char ch = static_cast<unsigned char>(raw);
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<unsigned char>(ch - 'A' + 'a');
    s = states_[static_cast<std::size_t>(s)].next[ch];
    ++result.positions_visited;
    int t = states_[static_cast<std::size_t>(s)].out.empty()
                ? states_[static_cast<std::size_t>(s)].dict_suffix
                : s;
    while (t != 0) {
      for (int pat : states_[static_cast<std::size_t>(t)].out)
        result.counts[static_cast<std::size_t>(pattern_cluster_[static_cast<std::size_t>(pat)])]++;
      t = states_[static_cast<std::size_t>(t)].dict_suffix;
    }
  }
  return result;
}

std::vector<int> ClusterMatcher::count(std::string_view text) const {
  return count_with_stats(text).counts;
}

namespace {

std::vector<std::string> words_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (util::is_ascii_alnum(c)) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// all longest common substrings of a pair, classic DP
std::set<std::string> longest_common_substrings(const std::string& a, const std::string& b,
                                                int min_len) {
  std::set<std::string> best;
  std::size_t best_len = 0;
  std::vector<std::vector<int>> dp(a.size() + 1, std::vector<int>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        dp[i][j] = dp[i - 1][j - 1] + 1;
        std::size_t len = static_cast<std::size_t>(dp[i][j]);
        if (len >= static_cast<std::size_t>(min_len)) {
          if (len > best_len) {
            best_len = len;
            best.clear();
          }
          if (len == best_len) best.insert(a.substr(i - len, len));
        }
      }
    }
  }
  return best;
}

std::set<std::string> char_trigrams(const std::string& s) {
  std::set<std::string> out;
  if (s.size() < 3) {
    out.insert(s);
    return out;
  }
  for (std::size_t i = 0; i + 3 <= s.size(); ++i) out.insert(s.substr(i, 3));
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : a)
    if (b.count(x)) ++inter;
  std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

std::vector<MinedSubstring> mine_substrings(const std::vector<std::string>& corpus,
                                            const std::unordered_set<std::string>& stopwords,
                                            int top_k, int min_len) {
  if (corpus.empty()) throw DataError("mine_substrings: empty corpus");
  if (top_k < 1 || min_len < 3) throw DataError("mine_substrings: bad parameters");

  std::unordered_map<std::string, long> freq;
  for (const auto& doc : corpus)
    for (auto& w : words_of(doc))
      if (!stopwords.count(w)) freq[w]++;

  std::vector<std::pair<std::string, long>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > static_cast<std::size_t>(top_k)) ranked.resize(static_cast<std::size_t>(top_k));

  std::set<std::string> candidates;
  for (std::size_t i = 0; i < ranked.size(); ++i)
    for (std::size_t j = i + 1; j < ranked.size(); ++j)
      for (auto& s : longest_common_substrings(ranked[i].first, ranked[j].first, min_len))
        candidates.insert(s);

  std::vector<std::string> lowered;
  lowered.reserve(corpus.size());
  for (const auto& doc : corpus) lowered.push_back(to_lower(doc));

  std::vector<MinedSubstring> mined;
  for (const auto& s : candidates) {
    int support = 0;
    for (const auto& doc : lowered)
      if (doc.find(s) != std::string::npos) ++support;
    if (support > 0) mined.push_back({s, support});
  }

  // drop strict substrings of another candidate with equal support
  std::vector<MinedSubstring> kept;
  for (const auto& m : mined) {
    bool dominated = false;
    for (const auto& other : mined) {
      if (other.substring.size() > m.substring.size() && other.support == m.support &&
          other.substring.find(m.substring) != std::string::npos) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(m);
  }
  std::sort(kept.begin(), kept.end(), [](const MinedSubstring& a, const MinedSubstring& b) {
    if (a.support != b.support) return a.support > b.support;
    return a.substring < b.substring;
  });
  return kept;
}

std::vector<ClusterProposal> cluster_candidates(const std::vector<MinedSubstring>& substrings,
                                                const std::vector<std::vector<double>>& cooccurrence,
                                                int target_k, double alpha) {
  const std::size_t n = substrings.size();
  if (n == 0) throw DataError("cluster_candidates: no substrings");
  if (target_k < 1 || static_cast<std::size_t>(target_k) > n)
    throw DataError("cluster_candidates: target_k out of range");
  if (cooccurrence.size() != n)
    throw DataError("cluster_candidates: co-occurrence matrix dimension mismatch");

  double max_cooc = 0.0;
  for (const auto& row : cooccurrence) {
    if (row.size() != n) throw DataError("cluster_candidates: co-occurrence matrix not square");
    for (double v : row) max_cooc = std::max(max_cooc, v);
  }

  std::vector<std::vector<double>> sim(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    auto gi = char_trigrams(substrings[i].substring);
    for (std::size_t j = i + 1; j < n; ++j) {
      auto gj = char_trigrams(substrings[j].substring);
      double cooc = max_cooc > 0 ? cooccurrence[i][j] / max_cooc : 0.0;
      sim[i][j] = sim[j][i] = alpha * jaccard(gi, gj) + (1.0 - alpha) * cooc;
    }
  }

  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups.push_back({i});

  auto smallest_member = [&](const std::vector<std::size_t>& g) {
    std::string best = substrings[g[0]].substring;
    for (auto idx : g) best = std::min(best, substrings[idx].substring);
    return best;
  };

  while (groups.size() > static_cast<std::size_t>(target_k)) {
    double best_sim = -1.0;
    std::size_t ba = 0, bb = 1;
    std::string best_key_a, best_key_b;
    for (std::size_t a = 0; a < groups.size(); ++a) {
      for (std::size_t b = a + 1; b < groups.size(); ++b) {
        double total = 0.0;
        for (auto i : groups[a])
          for (auto j : groups[b]) total += sim[i][j];
        double avg = total / static_cast<double>(groups[a].size() * groups[b].size());
        std::string ka = smallest_member(groups[a]);
        std::string kb = smallest_member(groups[b]);
        if (ka > kb) std::swap(ka, kb);
        bool better = avg > best_sim + 1e-12;
        bool tie = std::abs(avg - best_sim) <= 1e-12;
        if (better || (tie && std::tie(ka, kb) < std::tie(best_key_a, best_key_b))) {
          best_sim = avg;
          ba = a;
          bb = b;
          best_key_a = ka;
          best_key_b = kb;
        }
      }
    }
    groups[ba].insert(groups[ba].end(), groups[bb].begin(), groups[bb].end());
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(bb));
  }

  std::sort(groups.begin(), groups.end(), [&](const auto& a, const auto& b) {
    return smallest_member(a) < smallest_member(b);
  });

  std::vector<ClusterProposal> out;
  for (auto& g : groups) {
    std::sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) {
      return substrings[a].substring < substrings[b].substring;
    });
    ClusterProposal p;
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < g.size(); ++a) {
      p.members.push_back(substrings[g[a]].substring);
      p.support.push_back(substrings[g[a]].support);
      for (std::size_t b = a + 1; b < g.size(); ++b) {
        total += sim[g[a]][g[b]];
        ++pairs;
      }
    }
    p.similarity = pairs == 0 ? 1.0 : total / static_cast<double>(pairs);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace smsguard::cluster
