#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include "textnet/rng.hpp"

namespace textnet {

// Directed stochastic-block-model network with community-flavored documents.
// content_signal is the probability that a word is drawn from the node's
// community vocabulary rather than the shared vocabulary.
struct SynthConfig {
  int nodes = 200;
  int communities = 2;
  double p_in = 0.05;
  double p_out = 0.005;
  int docs_per_node = 1;
  int sent_len_min = 3;
  int sent_len_max = 8;
  int vocab_per_community = 50;
  int vocab_shared = 100;
  double content_signal = 0.5;
  std::uint64_t seed = 1;

  void validate() const {
    if (nodes < 2) throw std::invalid_argument("nodes must be >= 2");
    if (communities < 2 || communities > nodes) {
      throw std::invalid_argument("communities must lie in [2, nodes]");
    }
    if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1) {
      throw std::invalid_argument("edge probabilities must lie in [0,1]");
    }
    if (p_out > p_in) throw std::invalid_argument("p_out must not exceed p_in");
    if (docs_per_node < 1) throw std::invalid_argument("docs_per_node must be >= 1");
    if (sent_len_min < 1 || sent_len_max < sent_len_min) {
      throw std::invalid_argument("sentence length range is invalid");
    }
    if (vocab_per_community < 1 || vocab_shared < 1) {
      throw std::invalid_argument("vocabulary sizes must be >= 1");
    }
    if (content_signal < 0 || content_signal > 1) {
      throw std::invalid_argument("content_signal must lie in [0,1]");
    }
  }
};

struct SynthCounts {
  std::size_t edges = 0;
  std::size_t documents = 0;
  std::size_t labels = 0;
};

// Emits the three ingestion files. Same seed, same bytes.
inline SynthCounts generate(const SynthConfig& cfg, const std::string& edges_path,
                            const std::string& contents_path, const std::string& labels_path) {
  cfg.validate();
  Rng rng(cfg.seed);
  SynthCounts counts;

  auto community = [&](int u) { return u % cfg.communities; };
  auto node_key = [](int u) { return "n" + std::to_string(u); };

  {
    std::ofstream out(edges_path);
    if (!out) throw std::runtime_error("cannot write edge file: " + edges_path);
    for (int u = 0; u < cfg.nodes; ++u) {
      for (int v = 0; v < cfg.nodes; ++v) {
        if (u == v) continue;
        const double p = community(u) == community(v) ? cfg.p_in : cfg.p_out;
        if (rng.uniform() < p) {
          out << node_key(u) << '\t' << node_key(v) << '\n';
          ++counts.edges;
        }
      }
    }
    if (!out) throw std::runtime_error("write failed: " + edges_path);
  }

  {
    std::ofstream out(contents_path);
    if (!out) throw std::runtime_error("cannot write content file: " + contents_path);
    for (int u = 0; u < cfg.nodes; ++u) {
      const int com = community(u);
      for (int d = 0; d < cfg.docs_per_node; ++d) {
        const int len =
            cfg.sent_len_min +
            static_cast<int>(rng.below(
                static_cast<std::uint64_t>(cfg.sent_len_max - cfg.sent_len_min + 1)));
        out << node_key(u) << '\t';
        for (int i = 0; i < len; ++i) {
          if (rng.uniform() < cfg.content_signal) {
            out << 'c' << com << 'w' << rng.below(static_cast<std::uint64_t>(cfg.vocab_per_community));
          } else {
            out << "shw" << rng.below(static_cast<std::uint64_t>(cfg.vocab_shared));
          }
          out << ' ';
        }
        out << ".\n";
        ++counts.documents;
      }
    }
    if (!out) throw std::runtime_error("write failed: " + contents_path);
  }

  {
    std::ofstream out(labels_path);
    if (!out) throw std::runtime_error("cannot write labels file: " + labels_path);
    for (int u = 0; u < cfg.nodes; ++u) {
      out << node_key(u) << "\tL" << community(u) << '\n';
      ++counts.labels;
    }
    if (!out) throw std::runtime_error("write failed: " + labels_path);
  }
  return counts;
}

}  // namespace textnet
