#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "textnet/graph.hpp"
#include "textnet/params.hpp"

namespace textnet {

// Numerically stable logistic function; never exponentiates a positive
// argument.
inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log sigma(x), stable for large |x|.
inline double log_sigmoid(double x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

// Forward cache for one sentence encode. Gate and state vectors are indexed
// by processing step; the backward direction of a BiGru processes positions
// right to left.
struct EncodeTrace {
  EncoderKind kind = EncoderKind::kWavg;
  std::vector<WordId> words;
  std::vector<Eigen::VectorXd> x;  // input word vectors, by position
  struct Pass {
    std::vector<Eigen::VectorXd> z, r, hbar, h;
    void clear() { z.clear(); r.clear(); hbar.clear(); h.clear(); }
  };
  Pass fwd, bwd;
  Eigen::VectorXd pooled;

  std::size_t length() const { return words.size(); }
  void clear() {
    words.clear();
    x.clear();
    fwd.clear();
    bwd.clear();
  }
};

// Gradients of a scalar loss w.r.t. encoder weights and the input word
// vectors of one sentence. Weight gradients accumulate across calls; input
// gradients are per call, aligned with trace positions.
struct EncodeGrad {
  GruWeights fwd, bwd;
  std::vector<Eigen::VectorXd> input;

  void init(const ModelParams& p) {
    if (!p.gru_fwd.empty()) {
      fwd.resize(p.gru_fwd.hidden(), static_cast<int>(p.gru_fwd.w_z.cols()));
    }
    if (!p.gru_bwd.empty()) {
      bwd.resize(p.gru_bwd.hidden(), static_cast<int>(p.gru_bwd.w_z.cols()));
    }
    reset();
  }

  void reset() {
    if (!fwd.empty()) fwd.set_zero();
    if (!bwd.empty()) bwd.set_zero();
  }

  double squared_norm() const {
    double s = 0;
    if (!fwd.empty()) s += fwd.squared_norm();
    if (!bwd.empty()) s += bwd.squared_norm();
    for (const auto& g : input) s += g.squaredNorm();
    return s;
  }
};

namespace detail {

inline void gru_gates(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                      const GruWeights& w, Eigen::VectorXd& z, Eigen::VectorXd& r,
                      Eigen::VectorXd& hbar) {
  z = (w.w_z * x + w.u_z * h_prev + w.b_z).unaryExpr(&sigmoid);
  r = (w.w_r * x + w.u_r * h_prev + w.b_r).unaryExpr(&sigmoid);
  hbar = (w.w_h * x + w.u_h * (r.cwiseProduct(h_prev)) + w.b_h).array().tanh();
}

// Runs one direction and mean-pools its states into `pooled`. When `trace`
// is given, gates and states are recorded by processing step.
inline void gru_run(const Sentence& sentence, const Eigen::MatrixXd& words,
                    const GruWeights& w, bool reversed, Eigen::VectorXd& pooled,
                    EncodeTrace::Pass* trace) {
  const std::size_t len = sentence.size();
  const int h = w.hidden();
  Eigen::VectorXd state = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd z, r, hbar;
  pooled = Eigen::VectorXd::Zero(h);
  for (std::size_t k = 0; k < len; ++k) {
    const std::size_t pos = reversed ? len - 1 - k : k;
    gru_gates(words.col(sentence[pos]), state, w, z, r, hbar);
    state = ((1.0 - z.array()) * state.array() + z.array() * hbar.array()).matrix();
    pooled += state;
    if (trace) {
      trace->z.push_back(z);
      trace->r.push_back(r);
      trace->hbar.push_back(hbar);
      trace->h.push_back(state);
    }
  }
  pooled /= static_cast<double>(len);
}

// Backpropagation through one direction. `per_step_upstream` is the pooling
// gradient added to every state; input gradients accumulate by position.
inline void gru_bptt(const GruWeights& w, const EncodeTrace::Pass& pass,
                     const std::vector<Eigen::VectorXd>& x, bool reversed,
                     const Eigen::VectorXd& per_step_upstream, GruWeights& grads,
                     std::vector<Eigen::VectorXd>& input_grads) {
  const std::size_t len = pass.h.size();
  const int h = w.hidden();
  Eigen::VectorXd carry = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd gh, dhbar, dz, dh_prev, da_h, da_z, da_r, dr, tmp;
  for (std::size_t k = len; k-- > 0;) {
    const std::size_t pos = reversed ? len - 1 - k : k;
    const Eigen::VectorXd& z = pass.z[k];
    const Eigen::VectorXd& r = pass.r[k];
    const Eigen::VectorXd& hbar = pass.hbar[k];
    const Eigen::VectorXd h_prev =
        k == 0 ? Eigen::VectorXd::Zero(h) : pass.h[k - 1];

    gh = per_step_upstream + carry;
    dhbar = gh.cwiseProduct(z);
    dz = gh.cwiseProduct(hbar - h_prev);
    dh_prev = gh.cwiseProduct(Eigen::VectorXd::Ones(h) - z);

    da_h = dhbar.cwiseProduct((1.0 - hbar.array().square()).matrix());
    grads.w_h.noalias() += da_h * x[pos].transpose();
    grads.u_h.noalias() += da_h * (r.cwiseProduct(h_prev)).transpose();
    grads.b_h += da_h;
    tmp.noalias() = w.u_h.transpose() * da_h;
    dr = tmp.cwiseProduct(h_prev);
    dh_prev += tmp.cwiseProduct(r);

    da_z = dz.cwiseProduct(z).cwiseProduct(Eigen::VectorXd::Ones(h) - z);
    grads.w_z.noalias() += da_z * x[pos].transpose();
    grads.u_z.noalias() += da_z * h_prev.transpose();
    grads.b_z += da_z;
    dh_prev.noalias() += w.u_z.transpose() * da_z;

    da_r = dr.cwiseProduct(r).cwiseProduct(Eigen::VectorXd::Ones(h) - r);
    grads.w_r.noalias() += da_r * x[pos].transpose();
    grads.u_r.noalias() += da_r * h_prev.transpose();
    grads.b_r += da_r;
    dh_prev.noalias() += w.u_r.transpose() * da_r;

    input_grads[pos].noalias() += w.w_z.transpose() * da_z;
    input_grads[pos].noalias() += w.w_r.transpose() * da_r;
    input_grads[pos].noalias() += w.w_h.transpose() * da_h;

    carry = dh_prev;
  }
}

inline void fill_trace_inputs(const Sentence& sentence, const Eigen::MatrixXd& words,
                              EncodeTrace& trace) {
  trace.words.assign(sentence.begin(), sentence.end());
  trace.x.resize(sentence.size());
  for (std::size_t i = 0; i < sentence.size(); ++i) trace.x[i] = words.col(sentence[i]);
}

}  // namespace detail

// f_e(c) = mean of the word vectors.
inline Eigen::VectorXd encode_wavg(const Sentence& sentence, const Eigen::MatrixXd& words) {
  if (sentence.empty()) throw std::invalid_argument("cannot encode an empty sentence");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(words.rows());
  for (WordId w : sentence) sum += words.col(w);
  return sum / static_cast<double>(sentence.size());
}

// One gated-recurrent step: z and r gates, candidate state, convex blend.
inline Eigen::VectorXd gru_cell(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                                const GruWeights& w) {
  Eigen::VectorXd z, r, hbar;
  detail::gru_gates(x, h_prev, w, z, r, hbar);
  return ((1.0 - z.array()) * h_prev.array() + z.array() * hbar.array()).matrix();
}

// Left-to-right recurrence from a zero state, mean-pooled over all states.
inline Eigen::VectorXd encode_gru(const Sentence& sentence, const Eigen::MatrixXd& words,
                                  const GruWeights& w, EncodeTrace* trace = nullptr) {
  if (sentence.empty()) throw std::invalid_argument("cannot encode an empty sentence");
  Eigen::VectorXd pooled;
  if (trace) {
    trace->clear();
    trace->kind = EncoderKind::kGru;
    detail::fill_trace_inputs(sentence, words, *trace);
    detail::gru_run(sentence, words, w, false, pooled, &trace->fwd);
    trace->pooled = pooled;
  } else {
    detail::gru_run(sentence, words, w, false, pooled, nullptr);
  }
  return pooled;
}

// Both directions with independent weights; per-position concatenation puts
// the forward half first, then mean pooling.
inline Eigen::VectorXd encode_bigru(const Sentence& sentence, const Eigen::MatrixXd& words,
                                    const GruWeights& fwd, const GruWeights& bwd,
                                    EncodeTrace* trace = nullptr) {
  if (sentence.empty()) throw std::invalid_argument("cannot encode an empty sentence");
  Eigen::VectorXd pf, pb;
  if (trace) {
    trace->clear();
    trace->kind = EncoderKind::kBigru;
    detail::fill_trace_inputs(sentence, words, *trace);
    detail::gru_run(sentence, words, fwd, false, pf, &trace->fwd);
    detail::gru_run(sentence, words, bwd, true, pb, &trace->bwd);
  } else {
    detail::gru_run(sentence, words, fwd, false, pf, nullptr);
    detail::gru_run(sentence, words, bwd, true, pb, nullptr);
  }
  Eigen::VectorXd pooled(pf.size() + pb.size());
  pooled.head(pf.size()) = pf;
  pooled.tail(pb.size()) = pb;
  if (trace) trace->pooled = pooled;
  return pooled;
}

// Dispatch on the configured composition function. Output dimension is
// always params.dim.
inline Eigen::VectorXd encode_sentence(const ModelParams& params, const Sentence& sentence,
                                       EncodeTrace* trace = nullptr) {
  switch (params.encoder) {
    case EncoderKind::kWavg: {
      Eigen::VectorXd pooled = encode_wavg(sentence, params.words);
      if (trace) {
        trace->clear();
        trace->kind = EncoderKind::kWavg;
        trace->words.assign(sentence.begin(), sentence.end());
        trace->pooled = pooled;
      }
      return pooled;
    }
    case EncoderKind::kGru:
      return encode_gru(sentence, params.words, params.gru_fwd, trace);
    case EncoderKind::kBigru:
      return encode_bigru(sentence, params.words, params.gru_fwd, params.gru_bwd, trace);
  }
  throw std::logic_error("unreachable");
}

// Exact gradients of upstream . f_e(c) through pooling, gates, and the
// recurrence. Weight gradients accumulate into `grad`; input gradients are
// rewritten, one per trace position.
inline void encode_backward(const ModelParams& params, const EncodeTrace& trace,
                            const Eigen::VectorXd& upstream, EncodeGrad& grad) {
  const std::size_t len = trace.length();
  if (len == 0) throw std::invalid_argument("empty trace");
  const double inv_len = 1.0 / static_cast<double>(len);

  grad.input.resize(len);
  switch (trace.kind) {
    case EncoderKind::kWavg:
      for (std::size_t i = 0; i < len; ++i) grad.input[i] = upstream * inv_len;
      return;
    case EncoderKind::kGru: {
      for (std::size_t i = 0; i < len; ++i) {
        grad.input[i] = Eigen::VectorXd::Zero(params.dim);
      }
      const Eigen::VectorXd per_step = upstream * inv_len;
      detail::gru_bptt(params.gru_fwd, trace.fwd, trace.x, false, per_step, grad.fwd,
                       grad.input);
      return;
    }
    case EncoderKind::kBigru: {
      for (std::size_t i = 0; i < len; ++i) {
        grad.input[i] = Eigen::VectorXd::Zero(params.dim);
      }
      const int h = params.half();
      const Eigen::VectorXd per_step_f = upstream.head(h) * inv_len;
      const Eigen::VectorXd per_step_b = upstream.tail(h) * inv_len;
      detail::gru_bptt(params.gru_fwd, trace.fwd, trace.x, false, per_step_f, grad.fwd,
                       grad.input);
      detail::gru_bptt(params.gru_bwd, trace.bwd, trace.x, true, per_step_b, grad.bwd,
                       grad.input);
      return;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace textnet
