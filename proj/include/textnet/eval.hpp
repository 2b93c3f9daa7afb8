#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "textnet/graph.hpp"
#include "textnet/io.hpp"
#include "textnet/rng.hpp"

namespace textnet {

struct LabeledSet {
  std::vector<std::string> keys;
  std::vector<int> labels;
  std::vector<std::string> label_names;

  std::size_t size() const { return keys.size(); }
  int num_classes() const { return static_cast<int>(label_names.size()); }
};

// Labels file: one `node_key<TAB>label_string` per line. Label ids are
// assigned in first-appearance order.
inline LabeledSet load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open labels file: " + path);
  LabeledSet out;
  std::unordered_map<std::string, int> label_ids;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank(line)) continue;
    auto [key, label] = detail::split_tab(line, path, lineno);
    if (key.empty() || label.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty field");
    }
    std::string k(key);
    if (!seen.emplace(k, lineno).second) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": duplicate node key '" +
                               k + "'");
    }
    std::string l(label);
    auto [it, inserted] = label_ids.emplace(l, static_cast<int>(out.label_names.size()));
    if (inserted) out.label_names.push_back(l);
    out.keys.push_back(std::move(k));
    out.labels.push_back(it->second);
  }
  if (out.label_names.size() < 2) {
    throw std::runtime_error(path + ": need at least 2 distinct labels");
  }
  return out;
}

// Gathers one feature row per labeled node from an embedding file; errors
// name the first node without an embedding.
inline Eigen::MatrixXd build_feature_matrix(const EmbeddingFile& embeddings,
                                            const LabeledSet& labeled) {
  std::unordered_map<std::string, const Eigen::VectorXd*> index;
  index.reserve(embeddings.rows.size());
  for (const auto& [key, vec] : embeddings.rows) index.emplace(key, &vec);
  Eigen::MatrixXd features(labeled.size(), embeddings.dim);
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    auto it = index.find(labeled.keys[i]);
    if (it == index.end()) {
      throw std::runtime_error("no embedding for labeled node '" + labeled.keys[i] + "'");
    }
    features.row(static_cast<Eigen::Index>(i)) = it->second->transpose();
  }
  return features;
}

// Uniform train/test partition without replacement. Resamples (up to 100
// times) until the train side covers every label class present in `labels`.
inline std::pair<std::vector<int>, std::vector<int>> split(Rng& rng,
                                                           const std::vector<int>& labels,
                                                           int num_classes, double ratio) {
  if (ratio <= 0 || ratio >= 1) throw std::invalid_argument("ratio must lie in (0,1)");
  const std::size_t n = labels.size();
  if (n < 2) throw std::invalid_argument("need at least 2 labeled nodes to split");
  std::vector<char> class_present(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) class_present.at(static_cast<std::size_t>(y)) = 1;

  const std::size_t n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))), 1, n - 1);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[rng.below(i + 1)]);
    }
    std::vector<char> covered(static_cast<std::size_t>(num_classes), 0);
    for (std::size_t i = 0; i < n_train; ++i) {
      covered[static_cast<std::size_t>(labels[static_cast<std::size_t>(order[i])])] = 1;
    }
    bool ok = true;
    for (int c = 0; c < num_classes; ++c) {
      if (class_present[static_cast<std::size_t>(c)] && !covered[static_cast<std::size_t>(c)]) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    std::vector<int> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<int> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return {std::move(train), std::move(test)};
  }
  throw std::runtime_error("could not draw a split covering every label class");
}

struct LogRegModel {
  Eigen::MatrixXd w;  // num_labels x d
  Eigen::VectorXd b;  // num_labels
  double lambda = 1.0;
};

// Regularized multinomial objective and its gradient. The bias is not
// regularized.
inline double logreg_loss_grad(const Eigen::MatrixXd& x, const std::vector<int>& y,
                               const Eigen::MatrixXd& w, const Eigen::VectorXd& b, double lambda,
                               Eigen::MatrixXd* gw, Eigen::VectorXd* gb) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = w.rows();
  Eigen::MatrixXd logits = x * w.transpose();
  logits.rowwise() += b.transpose();
  double loss = 0;
  Eigen::MatrixXd p(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::ArrayXd e = (logits.row(i).array() - m).exp();
    const double z = e.sum();
    p.row(i) = (e / z).matrix().transpose();
    loss += -(logits(i, y[static_cast<std::size_t>(i)]) - m - std::log(z));
  }
  loss /= static_cast<double>(n);
  loss += 0.5 * lambda / static_cast<double>(n) * w.squaredNorm();
  if (gw || gb) {
    for (Eigen::Index i = 0; i < n; ++i) p(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    if (gw) {
      *gw = (p.transpose() * x) / static_cast<double>(n);
      *gw += (lambda / static_cast<double>(n)) * w;
    }
    if (gb) *gb = p.colwise().sum().transpose() / static_cast<double>(n);
  }
  return loss;
}

// Full-batch gradient descent with backtracking step halving. The objective
// is non-increasing across accepted iterations.
inline LogRegModel fit_logreg(const Eigen::MatrixXd& x, const std::vector<int>& y,
                              int num_classes, double lambda = 1.0, int iters = 500) {
  if (!x.allFinite()) throw std::invalid_argument("non-finite feature value");
  if (static_cast<std::size_t>(x.rows()) != y.size() || y.empty()) {
    throw std::invalid_argument("feature/label size mismatch");
  }
  LogRegModel model;
  model.lambda = lambda;
  model.w = Eigen::MatrixXd::Zero(num_classes, x.cols());
  model.b = Eigen::VectorXd::Zero(num_classes);

  double step = 1.0;
  Eigen::MatrixXd gw, wc;
  Eigen::VectorXd gb, bc;
  for (int it = 0; it < iters; ++it) {
    const double loss = logreg_loss_grad(x, y, model.w, model.b, lambda, &gw, &gb);
    const double gsq = gw.squaredNorm() + gb.squaredNorm();
    if (std::sqrt(gsq) < 1e-8) break;
    bool accepted = false;
    while (step >= 1e-14) {
      wc = model.w - step * gw;
      bc = model.b - step * gb;
      const double cand = logreg_loss_grad(x, y, wc, bc, lambda, nullptr, nullptr);
      if (cand <= loss - 1e-4 * step * gsq) {
        model.w.swap(wc);
        model.b.swap(bc);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    step = std::min(step * 2.0, 1024.0);
  }
  return model;
}

inline std::vector<int> predict(const LogRegModel& model, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd logits = x * model.w.transpose();
  logits.rowwise() += model.b.transpose();
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

// Micro-averaged F1 from globally pooled confusion counts. For single-label
// multiclass predictions this equals accuracy.
inline double micro_f1(const std::vector<int>& predictions, const std::vector<int>& gold) {
  if (predictions.size() != gold.size()) throw std::invalid_argument("length mismatch");
  if (predictions.empty()) throw std::invalid_argument("empty prediction vector");
  long long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predictions[i] == gold[i]) {
      ++tp;
    } else {
      ++fp;  // counted for the predicted class
      ++fn;  // counted for the gold class
    }
  }
  return (2.0 * static_cast<double>(tp)) /
         (2.0 * static_cast<double>(tp) + static_cast<double>(fp) + static_cast<double>(fn));
}

struct EvalReport {
  struct Row {
    double ratio;
    double mean_micro_f1;
    double stddev;
    int trials;
  };
  std::vector<Row> rows;
};

// Report CSV: ratio,mean_micro_f1,std,trials
inline void write_eval_csv(std::ostream& os, const EvalReport& report) {
  os << "ratio,mean_micro_f1,std,trials\n";
  char buf[96];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.2f,%.6f,%.6f,%d\n", r.ratio, r.mean_micro_f1, r.stddev,
                  r.trials);
    os << buf;
  }
}

// Repeated random-split node classification. Per trial: split, standardize
// features on the train side, fit, score Micro-F1 on the test side. Trials
// use independent seed-derived RNG streams, so reports are reproducible.
inline EvalReport evaluate(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                           int num_classes, const std::vector<double>& ratios, int trials,
                           std::uint64_t seed, double lambda = 1.0, int iters = 500) {
  if (!features.allFinite()) throw std::invalid_argument("non-finite feature value");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw std::invalid_argument("feature/label size mismatch");
  }
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");

  EvalReport report;
  for (std::size_t ri = 0; ri < ratios.size(); ++ri) {
    const double ratio = ratios[ri];
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
      Rng rng(mix64(seed, ri, static_cast<std::uint64_t>(t)));
      auto [train_idx, test_idx] = split(rng, labels, num_classes, ratio);

      Eigen::MatrixXd xtr(train_idx.size(), features.cols());
      std::vector<int> ytr(train_idx.size());
      for (std::size_t i = 0; i < train_idx.size(); ++i) {
        xtr.row(static_cast<Eigen::Index>(i)) = features.row(train_idx[i]);
        ytr[i] = labels[static_cast<std::size_t>(train_idx[i])];
      }
      Eigen::MatrixXd xte(test_idx.size(), features.cols());
      std::vector<int> yte(test_idx.size());
      for (std::size_t i = 0; i < test_idx.size(); ++i) {
        xte.row(static_cast<Eigen::Index>(i)) = features.row(test_idx[i]);
        yte[i] = labels[static_cast<std::size_t>(test_idx[i])];
      }

      // Standardization is fit on the train split only.
      const Eigen::RowVectorXd mean = xtr.colwise().mean();
      Eigen::RowVectorXd sd =
          ((xtr.rowwise() - mean).array().square().colwise().sum() /
           static_cast<double>(xtr.rows()))
              .sqrt();
      for (Eigen::Index j = 0; j < sd.size(); ++j) {
        if (sd[j] < 1e-12) sd[j] = 1.0;
      }
      xtr = (xtr.rowwise() - mean).array().rowwise() / sd.array();
      xte = (xte.rowwise() - mean).array().rowwise() / sd.array();

      const LogRegModel model = fit_logreg(xtr, ytr, num_classes, lambda, iters);
      scores.push_back(micro_f1(predict(model, xte), yte));
    }
    const double mean_f1 =
        std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
    double var = 0;
    for (double s : scores) var += (s - mean_f1) * (s - mean_f1);
    const double sd_f1 =
        scores.size() > 1 ? std::sqrt(var / static_cast<double>(scores.size() - 1)) : 0.0;
    report.rows.push_back({ratio, mean_f1, sd_f1, trials});
  }
  return report;
}

}  // namespace textnet
