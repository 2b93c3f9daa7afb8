#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "textnet/encoders.hpp"
#include "textnet/graph.hpp"
#include "textnet/params.hpp"
#include "textnet/rng.hpp"
#include "textnet/sampler.hpp"

namespace textnet {

enum class Branch { kNodeNode, kNodeContent };

inline const char* to_string(Branch b) {
  return b == Branch::kNodeNode ? "nn" : "nc";
}

struct TrainConfig {
  double alpha = 0.5;  // probability of a structural step
  int dim = 200;
  EncoderKind encoder = EncoderKind::kWavg;
  int neg_nn = 15;
  int neg_nc = 25;
  double eta0 = 0;  // 0 -> 0.025 for wavg, 0.01 for gru/bigru
  int epochs = 100;
  long long max_steps = 0;  // 0 -> epochs * (|E_nn| + |E_nc|)
  bool directed_score = true;
  std::uint64_t seed = 1;
  int workers = 1;
  bool freeze_words = false;
  std::optional<double> grad_clip;  // max L2 norm of one step's gradient
  bool uniform_negatives = false;

  double resolved_eta0() const {
    if (eta0 > 0) return eta0;
    return encoder == EncoderKind::kWavg ? 0.025 : 0.01;
  }
};

struct StepReport {
  long long step = -1;
  Branch branch = Branch::kNodeNode;
  double loss = 0;
  double eta = 0;
};

struct TraceRow {
  long long step;
  Branch branch;
  double window_mean_loss;
  double eta;
};

struct TrainResult {
  std::vector<TraceRow> trace;
  long long total_steps = 0;
  long long nn_steps = 0;
  long long nc_steps = 0;
  long long nn_edges_scored = 0;  // positive + negative node pairs scored
  double first_decile_mean_loss = 0;
  double last_decile_mean_loss = 0;
};

namespace detail {

inline double nn_raw_score(const ModelParams& p, NodeId u, NodeId v, bool directed) {
  if (directed) return p.in_half(v).dot(p.out_half(u));
  return p.nodes.col(u).dot(p.nodes.col(v));
}

}  // namespace detail

// Probability of edge (u,v). Directed form scores the target's in-half
// against the source's out-half; the symmetric form uses the full vectors.
inline double score_nn(const ModelParams& p, NodeId u, NodeId v, bool directed = true) {
  return sigmoid(detail::nn_raw_score(p, u, v, directed));
}

// Probability of attachment between node u and an encoded sentence.
inline double score_nc(const ModelParams& p, NodeId u, const Eigen::VectorXd& sentence_embedding) {
  if (sentence_embedding.size() != p.dim) {
    throw std::invalid_argument("sentence embedding dimension mismatch");
  }
  return sigmoid(p.node_concat(u).dot(sentence_embedding));
}

// Per-step negative-sampling loss, forward only.
inline double nn_loss(const ModelParams& p, NodeId u, NodeId v, std::span<const NodeId> negatives,
                      bool directed = true) {
  double loss = -log_sigmoid(detail::nn_raw_score(p, u, v, directed));
  for (NodeId n : negatives) loss += -log_sigmoid(-detail::nn_raw_score(p, u, n, directed));
  return loss;
}

inline double nc_loss(const ModelParams& p, const AugmentedNetwork& net, NodeId u, ContentId c,
                      std::span<const ContentId> negatives) {
  const Eigen::VectorXd cat = p.node_concat(u);
  double loss = -log_sigmoid(cat.dot(encode_sentence(p, net.content_sentences[c])));
  for (ContentId n : negatives) {
    loss += -log_sigmoid(-cat.dot(encode_sentence(p, net.content_sentences[n])));
  }
  return loss;
}

// One SGD step on a structural edge. All gradients are evaluated at the
// pre-update parameters, then applied together.
inline StepReport step_nn(ModelParams& p, NodeId u, NodeId v, std::span<const NodeId> negatives,
                          double eta, bool directed = true,
                          std::optional<double> grad_clip = std::nullopt) {
  double loss = 0;
  std::vector<std::pair<NodeId, double>> touched;
  touched.reserve(1 + negatives.size());

  if (directed) {
    auto uout = p.out_half(u);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(p.half());
    auto visit = [&](NodeId x, bool positive) {
      const double s = p.in_half(x).dot(uout);
      const double g = positive ? sigmoid(s) - 1.0 : sigmoid(s);
      loss += positive ? -log_sigmoid(s) : -log_sigmoid(-s);
      acc += g * p.in_half(x);
      touched.emplace_back(x, g);
    };
    visit(v, true);
    for (NodeId n : negatives) visit(n, false);
    if (grad_clip) {
      double sq = acc.squaredNorm();
      const double uo2 = uout.squaredNorm();
      for (const auto& [x, g] : touched) sq += g * g * uo2;
      if (sq > *grad_clip * *grad_clip) {
        const double sc = *grad_clip / std::sqrt(sq);
        acc *= sc;
        for (auto& t : touched) t.second *= sc;
      }
    }
    for (const auto& [x, g] : touched) p.in_half(x) -= (eta * g) * uout;
    p.out_half(u) -= eta * acc;
  } else {
    auto eu = p.nodes.col(u);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(p.dim);
    auto visit = [&](NodeId x, bool positive) {
      const double s = p.nodes.col(x).dot(eu);
      const double g = positive ? sigmoid(s) - 1.0 : sigmoid(s);
      loss += positive ? -log_sigmoid(s) : -log_sigmoid(-s);
      acc += g * p.nodes.col(x);
      touched.emplace_back(x, g);
    };
    visit(v, true);
    for (NodeId n : negatives) visit(n, false);
    if (grad_clip) {
      double sq = acc.squaredNorm();
      const double eu2 = eu.squaredNorm();
      for (const auto& [x, g] : touched) sq += g * g * eu2;
      if (sq > *grad_clip * *grad_clip) {
        const double sc = *grad_clip / std::sqrt(sq);
        acc *= sc;
        for (auto& t : touched) t.second *= sc;
      }
    }
    for (const auto& [x, g] : touched) p.nodes.col(x) -= (eta * g) * eu;
    p.nodes.col(u) -= eta * acc;
  }
  return {.step = -1, .branch = Branch::kNodeNode, .loss = loss, .eta = eta};
}

// Reusable buffers for content steps.
struct NcWork {
  std::vector<EncodeTrace> traces;
  EncodeGrad enc_grad;
  Eigen::VectorXd cat, node_grad, upstream;
  std::vector<WordId> word_ids;
  std::vector<Eigen::VectorXd> word_grads;
  std::vector<double> coeff;
  bool ready = false;
};

// One SGD step on a node-content attachment. Touches the node's two halves,
// the encoder weights, and (unless frozen) the word vectors of the positive
// and all negative sentences.
inline StepReport step_nc(ModelParams& p, const AugmentedNetwork& net, NodeId u, ContentId c,
                          std::span<const ContentId> negatives, double eta,
                          std::optional<double> grad_clip = std::nullopt,
                          NcWork* work = nullptr) {
  NcWork local;
  NcWork& w = work ? *work : local;
  if (!w.ready) {
    w.enc_grad.init(p);
    w.ready = true;
  } else {
    w.enc_grad.reset();
  }
  const std::size_t m = 1 + negatives.size();
  if (w.traces.size() < m) w.traces.resize(m);
  w.coeff.resize(m);

  w.cat = p.node_concat(u);
  w.node_grad = Eigen::VectorXd::Zero(p.dim);
  double loss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const ContentId cid = i == 0 ? c : negatives[i - 1];
    const Eigen::VectorXd f = encode_sentence(p, net.content_sentences[cid], &w.traces[i]);
    const double s = w.cat.dot(f);
    const double g = i == 0 ? sigmoid(s) - 1.0 : sigmoid(s);
    loss += i == 0 ? -log_sigmoid(s) : -log_sigmoid(-s);
    w.coeff[i] = g;
    w.node_grad += g * f;
  }

  w.word_ids.clear();
  w.word_grads.clear();
  for (std::size_t i = 0; i < m; ++i) {
    w.upstream = w.coeff[i] * w.cat;
    encode_backward(p, w.traces[i], w.upstream, w.enc_grad);
    for (std::size_t pos = 0; pos < w.traces[i].length(); ++pos) {
      w.word_ids.push_back(w.traces[i].words[pos]);
      w.word_grads.push_back(std::move(w.enc_grad.input[pos]));
    }
  }

  if (grad_clip) {
    double sq = w.node_grad.squaredNorm();
    if (!w.enc_grad.fwd.empty()) sq += w.enc_grad.fwd.squared_norm();
    if (!w.enc_grad.bwd.empty()) sq += w.enc_grad.bwd.squared_norm();
    for (const auto& g : w.word_grads) sq += g.squaredNorm();
    if (sq > *grad_clip * *grad_clip) {
      const double sc = *grad_clip / std::sqrt(sq);
      w.node_grad *= sc;
      if (!w.enc_grad.fwd.empty()) w.enc_grad.fwd.scale(sc);
      if (!w.enc_grad.bwd.empty()) w.enc_grad.bwd.scale(sc);
      for (auto& g : w.word_grads) g *= sc;
    }
  }

  const int h = p.half();
  p.out_half(u) -= eta * w.node_grad.head(h);
  p.in_half(u) -= eta * w.node_grad.tail(h);
  if (!p.gru_fwd.empty()) p.gru_fwd.sgd_step(w.enc_grad.fwd, eta);
  if (!p.gru_bwd.empty()) p.gru_bwd.sgd_step(w.enc_grad.bwd, eta);
  if (!p.freeze_words) {
    for (std::size_t j = 0; j < w.word_ids.size(); ++j) {
      p.words.col(w.word_ids[j]) -= eta * w.word_grads[j];
    }
  }
  return {.step = -1, .branch = Branch::kNodeContent, .loss = loss, .eta = eta};
}

// Joint SGD over both link types. Each step draws x ~ U[0,1) and takes a
// structural step when x < alpha, a content step otherwise. The learning
// rate decays linearly to a floor of eta0 * 1e-4. Worker i seeds its RNG
// with seed + i; parameter updates are unsynchronized across workers, so
// bit-reproducibility holds for workers = 1.
inline TrainResult train(const AugmentedNetwork& net, ModelParams& params,
                         const TrainConfig& cfg) {
  if (cfg.alpha < 0 || cfg.alpha > 1) throw std::invalid_argument("alpha must lie in [0,1]");
  if (cfg.dim != params.dim) throw std::invalid_argument("config dimension differs from params");
  if (cfg.alpha > 0 && net.edges_nn.empty()) {
    throw std::runtime_error("alpha > 0 requires node-node edges");
  }
  if (cfg.alpha < 1 && net.edges_nc.empty()) {
    throw std::runtime_error("alpha < 1 requires node-content edges");
  }
  if (cfg.neg_nn < 1 || cfg.neg_nc < 1) throw std::invalid_argument("negative counts must be >= 1");
  if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");

  const long long total =
      cfg.max_steps > 0
          ? cfg.max_steps
          : static_cast<long long>(cfg.epochs) *
                static_cast<long long>(net.edges_nn.size() + net.edges_nc.size());
  if (total <= 0) throw std::invalid_argument("no training steps configured");

  params.freeze_words = cfg.freeze_words;
  const double eta0 = cfg.resolved_eta0();
  const double eta_floor = eta0 * 1e-4;

  NegTable node_table, content_table;
  if (cfg.alpha > 0) node_table = NegTable::for_nodes(net, 0.75, cfg.uniform_negatives);
  if (cfg.alpha < 1) content_table = NegTable::for_contents(net, 0.75, cfg.uniform_negatives);

  TrainResult result;
  result.total_steps = total;
  const long long head_end = total / 10;
  const long long tail_start = total - total / 10;

  std::atomic<long long> next_step{0};
  std::mutex collect_mu;
  double window_sum = 0;
  long long window_count = 0;
  Branch last_branch = Branch::kNodeNode;
  double head_sum = 0, tail_sum = 0;
  long long head_n = 0, tail_n = 0;

  auto worker = [&](int worker_id) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(worker_id));
    NcWork work;
    long long nn_steps = 0, nc_steps = 0, nn_scored = 0;
    for (;;) {
      const long long s = next_step.fetch_add(1, std::memory_order_relaxed);
      if (s >= total) break;
      const double eta =
          std::max(eta0 * (1.0 - static_cast<double>(s) / static_cast<double>(total)), eta_floor);
      StepReport rep;
      if (rng.uniform() < cfg.alpha) {
        const auto [u, v] = sample_positive_nn(rng, net);
        const auto negs = sample_negatives_nn(rng, u, cfg.neg_nn, net, node_table);
        rep = step_nn(params, u, v, negs, eta, cfg.directed_score, cfg.grad_clip);
        ++nn_steps;
        nn_scored += 1 + static_cast<long long>(negs.size());
      } else {
        const auto [u, c] = sample_positive_nc(rng, net);
        const auto negs = sample_negatives_nc(rng, u, cfg.neg_nc, net, content_table);
        rep = step_nc(params, net, u, c, negs, eta, cfg.grad_clip, &work);
        ++nc_steps;
      }
      assert(std::isfinite(rep.loss));
      {
        std::lock_guard<std::mutex> lock(collect_mu);
        window_sum += rep.loss;
        ++window_count;
        last_branch = rep.branch;
        if (window_count == 1000) {
          result.trace.push_back(
              {s, rep.branch, window_sum / static_cast<double>(window_count), eta});
          window_sum = 0;
          window_count = 0;
        }
        if (s < head_end) {
          head_sum += rep.loss;
          ++head_n;
        }
        if (s >= tail_start) {
          tail_sum += rep.loss;
          ++tail_n;
        }
      }
    }
    std::lock_guard<std::mutex> lock(collect_mu);
    result.nn_steps += nn_steps;
    result.nc_steps += nc_steps;
    result.nn_edges_scored += nn_scored;
  };

  if (cfg.workers == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(cfg.workers));
    for (int i = 0; i < cfg.workers; ++i) threads.emplace_back(worker, i);
    for (auto& t : threads) t.join();
  }

  if (window_count > 0) {
    const double last_eta = std::max(
        eta0 * (1.0 - static_cast<double>(total - 1) / static_cast<double>(total)), eta_floor);
    result.trace.push_back(
        {total - 1, last_branch, window_sum / static_cast<double>(window_count), last_eta});
  }
  if (head_n > 0) result.first_decile_mean_loss = head_sum / static_cast<double>(head_n);
  if (tail_n > 0) result.last_decile_mean_loss = tail_sum / static_cast<double>(tail_n);
  assert(params.all_finite());
  return result;
}

// Loss trace CSV: step,branch,window_mean_loss,eta
inline void write_loss_csv(std::ostream& os, const TrainResult& result) {
  os << "step,branch,window_mean_loss,eta\n";
  char buf[64];
  for (const auto& row : result.trace) {
    std::snprintf(buf, sizeof buf, "%lld,%s,%.6f,%.8f\n", row.step, to_string(row.branch),
                  row.window_mean_loss, row.eta);
    os << buf;
  }
}

}  // namespace textnet
