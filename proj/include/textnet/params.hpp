#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "textnet/graph.hpp"
#include "textnet/io.hpp"
#include "textnet/rng.hpp"

namespace textnet {

enum class EncoderKind { kWavg, kGru, kBigru };

inline const char* to_string(EncoderKind k) {
  switch (k) {
    case EncoderKind::kWavg: return "wavg";
    case EncoderKind::kGru: return "gru";
    case EncoderKind::kBigru: return "bigru";
  }
  return "?";
}

inline EncoderKind parse_encoder_kind(const std::string& s) {
  if (s == "wavg") return EncoderKind::kWavg;
  if (s == "gru") return EncoderKind::kGru;
  if (s == "bigru") return EncoderKind::kBigru;
  throw std::invalid_argument("unknown encoder kind: " + s);
}

// One direction of gate weights. w_*: hidden x input, u_*: hidden x hidden.
struct GruWeights {
  Eigen::MatrixXd w_z, u_z, w_r, u_r, w_h, u_h;
  Eigen::VectorXd b_z, b_r, b_h;

  void resize(int hidden, int input) {
    w_z.resize(hidden, input); u_z.resize(hidden, hidden); b_z.resize(hidden);
    w_r.resize(hidden, input); u_r.resize(hidden, hidden); b_r.resize(hidden);
    w_h.resize(hidden, input); u_h.resize(hidden, hidden); b_h.resize(hidden);
  }

  void set_zero() {
    w_z.setZero(); u_z.setZero(); b_z.setZero();
    w_r.setZero(); u_r.setZero(); b_r.setZero();
    w_h.setZero(); u_h.setZero(); b_h.setZero();
  }

  int hidden() const { return static_cast<int>(w_z.rows()); }
  bool empty() const { return w_z.size() == 0; }

  // this -= eta * g
  void sgd_step(const GruWeights& g, double eta) {
    w_z -= eta * g.w_z; u_z -= eta * g.u_z; b_z -= eta * g.b_z;
    w_r -= eta * g.w_r; u_r -= eta * g.u_r; b_r -= eta * g.b_r;
    w_h -= eta * g.w_h; u_h -= eta * g.u_h; b_h -= eta * g.b_h;
  }

  void scale(double s) {
    w_z *= s; u_z *= s; b_z *= s;
    w_r *= s; u_r *= s; b_r *= s;
    w_h *= s; u_h *= s; b_h *= s;
  }

  double squared_norm() const {
    return w_z.squaredNorm() + u_z.squaredNorm() + b_z.squaredNorm() +
           w_r.squaredNorm() + u_r.squaredNorm() + b_r.squaredNorm() +
           w_h.squaredNorm() + u_h.squaredNorm() + b_h.squaredNorm();
  }

  bool all_finite() const {
    return w_z.allFinite() && u_z.allFinite() && b_z.allFinite() &&
           w_r.allFinite() && u_r.allFinite() && b_r.allFinite() &&
           w_h.allFinite() && u_h.allFinite() && b_h.allFinite();
  }
};

// All learnable state. Node vectors are stored as columns; rows [0, d/2) hold
// the in-half, rows [d/2, d) the out-half.
struct ModelParams {
  int dim = 0;
  EncoderKind encoder = EncoderKind::kWavg;
  bool freeze_words = false;
  Eigen::MatrixXd nodes;  // dim x node_count
  Eigen::MatrixXd words;  // dim x vocab_size
  GruWeights gru_fwd, gru_bwd;

  int half() const { return dim / 2; }
  std::size_t node_count() const { return static_cast<std::size_t>(nodes.cols()); }
  std::size_t vocab_size() const { return static_cast<std::size_t>(words.cols()); }

  auto in_half(NodeId u) { return nodes.col(u).head(half()); }
  auto out_half(NodeId u) { return nodes.col(u).tail(half()); }
  auto in_half(NodeId u) const { return nodes.col(u).head(half()); }
  auto out_half(NodeId u) const { return nodes.col(u).tail(half()); }

  // Concatenation used against content vectors: out-half first, then in-half.
  Eigen::VectorXd node_concat(NodeId u) const {
    Eigen::VectorXd cat(dim);
    cat.head(half()) = out_half(u);
    cat.tail(half()) = in_half(u);
    return cat;
  }

  bool all_finite() const {
    if (!nodes.allFinite() || !words.allFinite()) return false;
    if (!gru_fwd.empty() && !gru_fwd.all_finite()) return false;
    if (!gru_bwd.empty() && !gru_bwd.all_finite()) return false;
    return true;
  }
};

namespace detail {

inline void fill_uniform(Eigen::MatrixXd& m, Rng& rng, double lo, double hi) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(lo, hi);
  }
}

inline void fill_glorot(Eigen::MatrixXd& m, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  fill_uniform(m, rng, -bound, bound);
}

inline void init_gru(GruWeights& w, int hidden, int input, Rng& rng) {
  w.resize(hidden, input);
  fill_glorot(w.w_z, rng); fill_glorot(w.u_z, rng); w.b_z.setZero();
  fill_glorot(w.w_r, rng); fill_glorot(w.u_r, rng); w.b_r.setZero();
  fill_glorot(w.w_h, rng); fill_glorot(w.u_h, rng); w.b_h.setZero();
}

}  // namespace detail

// Embedding vectors start uniform in [-0.5/d, 0.5/d]; gate matrices use the
// fan-balanced uniform range; biases start at zero. Pure function of its
// arguments.
inline ModelParams init_params(std::size_t node_count, std::size_t vocab_size, int d,
                               EncoderKind encoder, std::uint64_t seed) {
  if (d < 2 || d % 2 != 0) {
    throw std::invalid_argument("embedding dimension must be even and >= 2, got " +
                                std::to_string(d));
  }
  ModelParams p;
  p.dim = d;
  p.encoder = encoder;
  Rng rng(seed);
  const double b = 0.5 / d;
  p.nodes.resize(d, static_cast<Eigen::Index>(node_count));
  detail::fill_uniform(p.nodes, rng, -b, b);
  p.words.resize(d, static_cast<Eigen::Index>(vocab_size));
  detail::fill_uniform(p.words, rng, -b, b);
  switch (encoder) {
    case EncoderKind::kWavg:
      break;
    case EncoderKind::kGru:
      detail::init_gru(p.gru_fwd, d, d, rng);
      break;
    case EncoderKind::kBigru:
      detail::init_gru(p.gru_fwd, d / 2, d, rng);
      detail::init_gru(p.gru_bwd, d / 2, d, rng);
      break;
  }
  return p;
}

struct WordVectorLoad {
  std::size_t loaded = 0;        // vocabulary words filled from the file
  std::size_t not_in_vocab = 0;  // file rows whose word is outside the vocabulary
};

// Overlays pretrained vectors onto the word table. Words missing from the
// file keep their random initialization; file words outside the vocabulary
// are skipped and counted.
inline WordVectorLoad load_word_vectors(ModelParams& params, const Vocabulary& vocab,
                                        const std::string& path) {
  const EmbeddingFile file = read_embedding_file(path);
  if (file.dim != static_cast<std::size_t>(params.dim)) {
    throw std::runtime_error(path + ": vector dimension " + std::to_string(file.dim) +
                             " does not match configured dimension " +
                             std::to_string(params.dim));
  }
  WordVectorLoad report;
  for (const auto& [word, vec] : file.rows) {
    if (auto id = vocab.find(word)) {
      params.words.col(*id) = vec;
      ++report.loaded;
    } else {
      ++report.not_in_vocab;
    }
  }
  return report;
}

enum class ExportPart { kFull, kIn, kOut };

inline ExportPart parse_export_part(const std::string& s) {
  if (s == "full") return ExportPart::kFull;
  if (s == "in") return ExportPart::kIn;
  if (s == "out") return ExportPart::kOut;
  throw std::invalid_argument("unknown export part: " + s);
}

// Writes node vectors in the embedding text format, keyed by original node
// keys. `full` emits out-half then in-half (the concatenation scored against
// content vectors); `in`/`out` emit the respective halves.
inline void export_embeddings(const ModelParams& params, const std::vector<std::string>& keys,
                              const std::string& path, ExportPart which = ExportPart::kFull) {
  if (keys.size() != params.node_count()) {
    throw std::invalid_argument("key count does not match node table size");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write embedding file: " + path);
  const int h = params.half();
  const int width = which == ExportPart::kFull ? params.dim : h;
  write_embedding_header(out, keys.size(), static_cast<std::size_t>(width));
  Eigen::VectorXd row(width);
  for (std::size_t u = 0; u < keys.size(); ++u) {
    switch (which) {
      case ExportPart::kFull: row = params.node_concat(static_cast<NodeId>(u)); break;
      case ExportPart::kIn: row = params.in_half(static_cast<NodeId>(u)); break;
      case ExportPart::kOut: row = params.out_half(static_cast<NodeId>(u)); break;
    }
    write_embedding_row(out, keys[u], row.data(), static_cast<std::size_t>(width));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Writes a word table in the embedding text format (used by pretraining).
inline void write_word_vectors(const std::string& path, const Vocabulary& vocab,
                               const Eigen::MatrixXd& table) {
  if (static_cast<std::size_t>(table.cols()) != vocab.size()) {
    throw std::invalid_argument("word table size does not match vocabulary");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write word vector file: " + path);
  write_embedding_header(out, vocab.size(), static_cast<std::size_t>(table.rows()));
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    write_embedding_row(out, vocab.words[w], table.col(static_cast<Eigen::Index>(w)).data(),
                        static_cast<std::size_t>(table.rows()));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace textnet
