#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "textnet/encoders.hpp"
#include "textnet/graph.hpp"
#include "textnet/params.hpp"
#include "textnet/rng.hpp"
#include "textnet/sampler.hpp"

namespace textnet {

struct PretrainConfig {
  int window = 5;
  int neg = 15;
  int epochs = 5;
  double eta0 = 0.025;
  int dim = 200;
  std::uint64_t seed = 1;
  int workers = 1;
  double subsample = 0;  // frequent-word subsampling threshold, 0 = off
};

// Skip-gram with negative sampling over the sentence corpus. Contexts never
// cross sentence boundaries; the window shrinks uniformly per center word.
// Returns the input-vector table (dim x vocab_size). Deterministic for
// workers = 1.
inline Eigen::MatrixXd pretrain_words(const std::vector<Sentence>& sentences,
                                      std::size_t vocab_size, const PretrainConfig& cfg) {
  if (sentences.empty()) throw std::invalid_argument("pretraining corpus is empty");
  if (cfg.window < 1) throw std::invalid_argument("window must be >= 1");
  if (cfg.dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");

  std::vector<double> freq(vocab_size, 0.0);
  long long corpus_tokens = 0;
  for (const auto& sent : sentences) {
    for (WordId w : sent) {
      freq.at(static_cast<std::size_t>(w)) += 1.0;
      ++corpus_tokens;
    }
  }
  const NegTable table(freq, 0.75);

  Eigen::MatrixXd input(cfg.dim, static_cast<Eigen::Index>(vocab_size));
  {
    Rng init_rng(cfg.seed);
    const double b = 0.5 / cfg.dim;
    detail::fill_uniform(input, init_rng, -b, b);
  }
  Eigen::MatrixXd context = Eigen::MatrixXd::Zero(cfg.dim, static_cast<Eigen::Index>(vocab_size));

  const long long total_tokens =
      static_cast<long long>(cfg.epochs) * std::max<long long>(corpus_tokens, 1);
  const double eta_floor = cfg.eta0 * 1e-4;
  std::atomic<long long> token_counter{0};

  auto worker = [&](int worker_id) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(worker_id));
    Eigen::VectorXd acc(cfg.dim);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (std::size_t si = worker_id; si < sentences.size();
           si += static_cast<std::size_t>(cfg.workers)) {
        const Sentence& sent = sentences[si];
        for (std::size_t i = 0; i < sent.size(); ++i) {
          const long long tok = token_counter.fetch_add(1, std::memory_order_relaxed);
          const double eta = std::max(
              cfg.eta0 * (1.0 - static_cast<double>(tok) / static_cast<double>(total_tokens)),
              eta_floor);
          const WordId center = sent[i];
          if (cfg.subsample > 0) {
            const double ratio = freq[static_cast<std::size_t>(center)] /
                                 static_cast<double>(corpus_tokens);
            const double keep = std::sqrt(cfg.subsample / ratio);
            if (keep < 1.0 && rng.uniform() >= keep) continue;
          }
          const long long b = 1 + static_cast<long long>(rng.below(
                                      static_cast<std::uint64_t>(cfg.window)));
          const long long lo = std::max<long long>(0, static_cast<long long>(i) - b);
          const long long hi =
              std::min<long long>(static_cast<long long>(sent.size()) - 1,
                                  static_cast<long long>(i) + b);
          for (long long j = lo; j <= hi; ++j) {
            if (j == static_cast<long long>(i)) continue;
            const WordId target = sent[static_cast<std::size_t>(j)];
            auto v_in = input.col(center);
            acc.setZero();
            for (int s = 0; s <= cfg.neg; ++s) {
              WordId out;
              bool positive;
              if (s == 0) {
                out = target;
                positive = true;
              } else {
                out = static_cast<WordId>(table.sample(rng));
                if (out == target) continue;
                positive = false;
              }
              auto v_out = context.col(out);
              const double score = v_in.dot(v_out);
              const double g = positive ? sigmoid(score) - 1.0 : sigmoid(score);
              acc += g * v_out;
              v_out -= (eta * g) * v_in;
            }
            v_in -= eta * acc;
          }
        }
      }
    }
  };

  if (cfg.workers == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(cfg.workers));
    for (int i = 0; i < cfg.workers; ++i) threads.emplace_back(worker, i);
    for (auto& t : threads) t.join();
  }
  return input;
}

}  // namespace textnet
