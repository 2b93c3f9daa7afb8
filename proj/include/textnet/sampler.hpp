#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "textnet/graph.hpp"
#include "textnet/rng.hpp"

namespace textnet {

// Cumulative-weight table for negative sampling. Weights are raised to
// `power` (0.75 by default, word2vec style); zero-weight ids are never drawn.
class NegTable {
 public:
  NegTable() = default;

  explicit NegTable(const std::vector<double>& weights, double power = 0.75) {
    cum_.reserve(weights.size());
    double total = 0;
    for (double w : weights) {
      if (w < 0) throw std::invalid_argument("negative sampling weight");
      total += w > 0 ? std::pow(w, power) : 0.0;
      cum_.push_back(total);
    }
    if (cum_.empty() || total <= 0) {
      throw std::invalid_argument("negative-sampling table needs a positive weight");
    }
  }

  std::size_t size() const { return cum_.size(); }

  std::size_t sample(Rng& rng) const {
    const double r = rng.uniform() * cum_.back();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), r);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cum_.begin(), static_cast<std::ptrdiff_t>(cum_.size()) - 1));
  }

  // Candidate nodes weighted by in-degree.
  static NegTable for_nodes(const AugmentedNetwork& net, double power = 0.75,
                            bool uniform = false) {
    std::vector<double> w(net.node_count, uniform ? 1.0 : 0.0);
    if (!uniform) {
      for (const auto& [u, v] : net.edges_nn) w[v] += 1.0;
    }
    return NegTable(w, uniform ? 1.0 : power);
  }

  // Candidate contents weighted by attachment count.
  static NegTable for_contents(const AugmentedNetwork& net, double power = 0.75,
                               bool uniform = false) {
    std::vector<double> w(net.content_count(), uniform ? 1.0 : 0.0);
    if (!uniform) {
      for (const auto& [u, c] : net.edges_nc) w[c] += 1.0;
    }
    return NegTable(w, uniform ? 1.0 : power);
  }

 private:
  std::vector<double> cum_;
};

inline std::pair<NodeId, NodeId> sample_positive_nn(Rng& rng, const AugmentedNetwork& net) {
  if (net.edges_nn.empty()) throw std::runtime_error("no node-node edges to sample");
  return net.edges_nn[rng.below(net.edges_nn.size())];
}

inline std::pair<NodeId, ContentId> sample_positive_nc(Rng& rng, const AugmentedNetwork& net) {
  if (net.edges_nc.empty()) throw std::runtime_error("no node-content edges to sample");
  return net.edges_nc[rng.below(net.edges_nc.size())];
}

// Draws up to k distinct nodes v' with (u,v') not an edge and v' != u.
// Rejection is capped at 100*k attempts; a short (possibly empty) result is
// returned when valid candidates are exhausted.
inline std::vector<NodeId> sample_negatives_nn(Rng& rng, NodeId u, int k,
                                               const AugmentedNetwork& net,
                                               const NegTable& table) {
  std::vector<NodeId> out;
  out.reserve(static_cast<std::size_t>(k));
  const long long cap = 100LL * k;
  for (long long attempt = 0; attempt < cap && static_cast<int>(out.size()) < k; ++attempt) {
    const NodeId v = static_cast<NodeId>(table.sample(rng));
    if (v == u || net.has_edge_nn(u, v)) continue;
    if (std::find(out.begin(), out.end(), v) != out.end()) continue;
    out.push_back(v);
  }
  return out;
}

// Content-side counterpart: draws c' with (u,c') not an attachment.
inline std::vector<ContentId> sample_negatives_nc(Rng& rng, NodeId u, int k,
                                                  const AugmentedNetwork& net,
                                                  const NegTable& table) {
  std::vector<ContentId> out;
  out.reserve(static_cast<std::size_t>(k));
  const long long cap = 100LL * k;
  for (long long attempt = 0; attempt < cap && static_cast<int>(out.size()) < k; ++attempt) {
    const ContentId c = static_cast<ContentId>(table.sample(rng));
    if (net.has_edge_nc(u, c)) continue;
    if (std::find(out.begin(), out.end(), c) != out.end()) continue;
    out.push_back(c);
  }
  return out;
}

}  // namespace textnet
