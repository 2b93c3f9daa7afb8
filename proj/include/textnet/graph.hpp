#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace textnet {

using NodeId = std::uint32_t;
using ContentId = std::uint32_t;
using WordId = std::int32_t;

// Token ids of one sentence; always non-empty and free of the pad sentinel.
using Sentence = std::vector<WordId>;

// word <-> id bijection. Id 0 is a padding sentinel that never occurs inside
// a Sentence; id 1 is the replacement for words below the min-count cutoff.
struct Vocabulary {
  static constexpr WordId kPad = 0;
  static constexpr WordId kUnk = 1;

  std::vector<std::string> words;
  std::vector<std::int64_t> counts;
  std::unordered_map<std::string, WordId> ids;

  Vocabulary() {
    add("<pad>", 1);
    add("<unk>", 1);
  }

  WordId add(std::string word, std::int64_t count) {
    const WordId id = static_cast<WordId>(words.size());
    ids.emplace(word, id);
    words.push_back(std::move(word));
    counts.push_back(count);
    return id;
  }

  std::optional<WordId> find(const std::string& word) const {
    auto it = ids.find(word);
    if (it == ids.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return words.size(); }
};

// Maps external string node keys to dense NodeIds in first-appearance order.
struct NodeInterner {
  std::vector<std::string> keys;
  std::unordered_map<std::string, NodeId> ids;

  NodeId intern(std::string_view key) {
    auto it = ids.find(std::string(key));
    if (it != ids.end()) return it->second;
    const NodeId id = static_cast<NodeId>(keys.size());
    keys.emplace_back(key);
    ids.emplace(keys.back(), id);
    return id;
  }

  std::optional<NodeId> find(std::string_view key) const {
    auto it = ids.find(std::string(key));
    if (it == ids.end()) return std::nullopt;
    return it->second;
  }

  const std::string& key(NodeId id) const { return keys.at(id); }
  std::size_t size() const { return keys.size(); }
};

struct AugmentedNetwork {
  std::size_t node_count = 0;
  std::vector<Sentence> content_sentences;               // ContentId -> tokens
  std::vector<std::pair<NodeId, NodeId>> edges_nn;       // directed, deduped, no self-loops
  std::vector<std::pair<NodeId, ContentId>> edges_nc;    // deduped
  std::vector<std::unordered_set<NodeId>> adjacency_nn;  // out-neighbors per node
  std::vector<std::unordered_set<ContentId>> adjacency_nc;

  std::size_t content_count() const { return content_sentences.size(); }

  bool has_edge_nn(NodeId u, NodeId v) const {
    return adjacency_nn[u].count(v) != 0;
  }
  bool has_edge_nc(NodeId u, ContentId c) const {
    return adjacency_nc[u].count(c) != 0;
  }
};

namespace detail {

inline bool is_blank(std::string_view s) {
  for (char c : s) {
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
  }
  return true;
}

// Splits `line` at the first tab into (key, rest). Throws if no tab.
inline std::pair<std::string_view, std::string_view> split_tab(
    std::string_view line, const std::string& path, std::size_t lineno) {
  const std::size_t tab = line.find('\t');
  if (tab == std::string_view::npos) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) +
                             ": expected two tab-separated fields");
  }
  std::string_view rest = line.substr(tab + 1);
  if (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);
  return {line.substr(0, tab), rest};
}

}  // namespace detail

// Splits a document into sentences on terminal punctuation (. ! ? and the
// full-width 。！？), lowercases ASCII letters, and tokenizes on whitespace.
// Empty sentences are dropped.
inline std::vector<std::vector<std::string>> split_sentences(std::string_view text) {
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> current;
  std::string token;

  auto end_token = [&] {
    if (!token.empty()) {
      current.push_back(token);
      token.clear();
    }
  };
  auto end_sentence = [&] {
    end_token();
    if (!current.empty()) {
      sentences.push_back(std::move(current));
      current.clear();
    }
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == '.' || c == '!' || c == '?') {
      end_sentence();
      ++i;
      continue;
    }
    // UTF-8 full-width terminators: 。 = E3 80 82, ！ = EF BC 81, ？ = EF BC 9F
    if (i + 2 < n) {
      const unsigned char c1 = static_cast<unsigned char>(text[i + 1]);
      const unsigned char c2 = static_cast<unsigned char>(text[i + 2]);
      if ((c == 0xE3 && c1 == 0x80 && c2 == 0x82) ||
          (c == 0xEF && c1 == 0xBC && (c2 == 0x81 || c2 == 0x9F))) {
        end_sentence();
        i += 3;
        continue;
      }
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f') {
      end_token();
      ++i;
      continue;
    }
    token.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                         : static_cast<char>(c));
    ++i;
  }
  end_sentence();
  return sentences;
}

// Reads `src<TAB>dst` lines, interning string keys to dense ids. Lines that
// are blank or start with '#' are skipped. With directed=false every edge
// also yields its reverse. Self-loops and duplicates are removed; first
// occurrence order is kept.
inline std::vector<std::pair<NodeId, NodeId>> load_edges(const std::string& path, bool directed,
                                                         NodeInterner& interner) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge file: " + path);

  std::vector<std::pair<NodeId, NodeId>> edges;
  std::unordered_set<std::uint64_t> seen;
  std::string line;
  std::size_t lineno = 0;
  std::size_t data_lines = 0;

  auto emit = [&](NodeId u, NodeId v) {
    if (u == v) return;
    const std::uint64_t code = (static_cast<std::uint64_t>(u) << 32) | v;
    if (seen.insert(code).second) edges.emplace_back(u, v);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank(line) || line[0] == '#') continue;
    ++data_lines;
    auto [src, rest] = detail::split_tab(line, path, lineno);
    if (src.empty() || rest.empty() || rest.find('\t') != std::string_view::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected two tab-separated fields");
    }
    const NodeId u = interner.intern(src);
    const NodeId v = interner.intern(rest);
    emit(u, v);
    if (!directed) emit(v, u);
  }
  if (data_lines == 0) throw std::runtime_error(path + ": edge file has no edges");
  return edges;
}

struct ContentLoad {
  Vocabulary vocab;
  std::vector<std::pair<NodeId, Sentence>> sentences;  // in file order
  std::size_t empty_documents = 0;                     // lines yielding no sentence
  std::int64_t unk_replacements = 0;                   // token occurrences mapped to <unk>
};

// Reads `node_key<TAB>document` lines. Documents are sentence-split and
// tokenized; words occurring fewer than vocab_min_count times over the whole
// corpus map to <unk>. Node keys absent from the edge file become isolated
// nodes via the shared interner.
inline ContentLoad load_contents(const std::string& path, int vocab_min_count,
                                 NodeInterner& interner) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open content file: " + path);
  if (vocab_min_count < 1) vocab_min_count = 1;

  ContentLoad out;
  std::vector<std::pair<NodeId, std::vector<std::string>>> raw;
  std::unordered_map<std::string, std::int64_t> freq;
  std::vector<std::string> first_seen;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank(line)) continue;
    auto [key, text] = detail::split_tab(line, path, lineno);
    if (key.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty node key");
    }
    const NodeId node = interner.intern(key);
    auto sentences = split_sentences(text);
    if (sentences.empty()) {
      ++out.empty_documents;
      continue;
    }
    for (auto& sent : sentences) {
      for (auto& word : sent) {
        auto [it, inserted] = freq.emplace(word, 0);
        if (inserted) first_seen.push_back(word);
        ++it->second;
      }
      raw.emplace_back(node, std::move(sent));
    }
  }

  for (const auto& word : first_seen) {
    const std::int64_t count = freq[word];
    // A literal "<pad>"/"<unk>" token in the corpus keeps its reserved id.
    if (count >= vocab_min_count && !out.vocab.find(word)) out.vocab.add(word, count);
  }

  out.sentences.reserve(raw.size());
  for (auto& [node, sent] : raw) {
    Sentence ids;
    ids.reserve(sent.size());
    for (const auto& word : sent) {
      if (auto id = out.vocab.find(word); id && *id > Vocabulary::kUnk) {
        ids.push_back(*id);
      } else {
        ids.push_back(Vocabulary::kUnk);
        ++out.unk_replacements;
      }
    }
    out.sentences.emplace_back(node, std::move(ids));
  }
  if (out.unk_replacements > 0) {
    out.vocab.counts[Vocabulary::kUnk] = out.unk_replacements;
  }
  return out;
}

// Assembles the augmented network. Sentences with identical token sequences
// are interned to a single content node, so nodes sharing a sentence connect
// through the same ContentId. (node, content) pairs are deduplicated.
inline AugmentedNetwork build_augmented(std::size_t node_count,
                                        std::vector<std::pair<NodeId, NodeId>> edges,
                                        const std::vector<std::pair<NodeId, Sentence>>& contents) {
  AugmentedNetwork net;
  net.node_count = node_count;
  net.edges_nn = std::move(edges);
  net.adjacency_nn.resize(node_count);
  net.adjacency_nc.resize(node_count);

  for (const auto& [u, v] : net.edges_nn) {
    if (u >= node_count || v >= node_count) {
      throw std::runtime_error("edge endpoint out of range");
    }
    net.adjacency_nn[u].insert(v);
  }

  std::map<Sentence, ContentId> intern;
  for (const auto& [u, sent] : contents) {
    if (u >= node_count) throw std::runtime_error("content node out of range");
    auto [it, inserted] = intern.emplace(sent, static_cast<ContentId>(net.content_sentences.size()));
    if (inserted) net.content_sentences.push_back(sent);
    const ContentId c = it->second;
    if (net.adjacency_nc[u].insert(c).second) net.edges_nc.emplace_back(u, c);
  }
  return net;
}

}  // namespace textnet
