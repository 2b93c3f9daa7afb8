#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "textnet/sampler.hpp"

using namespace textnet;

namespace {

// Small hand-built network: `edges` as (u,v) pairs over node_count nodes,
// `attachments` as (u,c) pairs.
AugmentedNetwork make_net(std::size_t node_count,
                          std::vector<std::pair<NodeId, NodeId>> edges,
                          std::vector<std::pair<NodeId, ContentId>> attachments = {}) {
  AugmentedNetwork net;
  net.node_count = node_count;
  net.edges_nn = std::move(edges);
  net.edges_nc = std::move(attachments);
  net.adjacency_nn.resize(node_count);
  net.adjacency_nc.resize(node_count);
  ContentId max_c = 0;
  for (const auto& [u, v] : net.edges_nn) net.adjacency_nn[u].insert(v);
  for (const auto& [u, c] : net.edges_nc) {
    net.adjacency_nc[u].insert(c);
    max_c = std::max(max_c, c);
  }
  if (!net.edges_nc.empty()) {
    net.content_sentences.resize(max_c + 1, Sentence{2});
  }
  return net;
}

}  // namespace

TEST_CASE("sample_positive on a single edge always returns it") {
  const auto net = make_net(2, {{0, 1}});
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    REQUIRE(sample_positive_nn(rng, net) == std::pair<NodeId, NodeId>{0, 1});
  }
}

TEST_CASE("sample_positive is uniform over the edge list") {
  const auto net = make_net(3, {{0, 1}, {1, 2}});
  Rng rng(2);
  const long long draws = 100000;
  long long first = 0;
  for (long long i = 0; i < draws; ++i) {
    if (sample_positive_nn(rng, net) == std::pair<NodeId, NodeId>{0, 1}) ++first;
  }
  REQUIRE(oracle::within_3_sigma(static_cast<double>(first), static_cast<double>(draws), 0.5));
}

TEST_CASE("sample_positive errors on an empty edge list") {
  const auto net = make_net(2, {});
  Rng rng(3);
  REQUIRE_THROWS(sample_positive_nn(rng, net));
  REQUIRE_THROWS(sample_positive_nc(rng, net));
}

TEST_CASE("node negatives avoid the source and its neighbors") {
  // star: node 0 points to everyone else
  std::vector<std::pair<NodeId, NodeId>> edges;
  const std::size_t n = 20;
  for (NodeId v = 1; v < n; ++v) edges.push_back({0, v});
  for (NodeId v = 1; v < n; ++v) edges.push_back({v, 0});  // gives everyone in-degree
  const auto net = make_net(n, std::move(edges));
  const auto table = NegTable::for_nodes(net);
  Rng rng(4);

  // center: no valid negatives exist, the cap returns an empty set
  REQUIRE(sample_negatives_nn(rng, 0, 5, net, table).empty());

  // leaves: never themselves, never 0 (their only out-neighbor)
  for (int trial = 0; trial < 200; ++trial) {
    const NodeId u = 1 + static_cast<NodeId>(rng.below(n - 1));
    for (NodeId neg : sample_negatives_nn(rng, u, 5, net, table)) {
      REQUIRE(neg != u);
      REQUIRE_FALSE(net.has_edge_nn(u, neg));
    }
  }
}

TEST_CASE("node negatives return k distinct ids on a sparse graph") {
  std::vector<std::pair<NodeId, NodeId>> edges;
  const std::size_t n = 1000;
  for (NodeId v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1});  // path graph
  const auto net = make_net(n, std::move(edges));
  const auto table = NegTable::for_nodes(net);
  Rng rng(5);
  const auto negs = sample_negatives_nn(rng, 17, 15, net, table);
  REQUIRE(negs.size() == 15);
  std::unordered_set<NodeId> uniq(negs.begin(), negs.end());
  REQUIRE(uniq.size() == 15);
}

TEST_CASE("content negatives satisfy the non-attachment definition") {
  std::vector<std::pair<NodeId, ContentId>> att;
  for (ContentId c = 0; c < 30; ++c) att.push_back({c % 5, c});
  auto net = make_net(5, {{0, 1}}, std::move(att));
  const auto table = NegTable::for_contents(net);
  Rng rng(6);
  for (NodeId u = 0; u < 5; ++u) {
    const auto negs = sample_negatives_nc(rng, u, 25, net, table);
    for (ContentId c : negs) REQUIRE_FALSE(net.has_edge_nc(u, c));
  }

  // node attached to every content gets nothing back
  std::vector<std::pair<NodeId, ContentId>> all;
  for (ContentId c = 0; c < 10; ++c) all.push_back({0, c});
  auto full = make_net(1, {}, std::move(all));
  const auto full_table = NegTable::for_contents(full);
  REQUIRE(sample_negatives_nc(rng, 0, 25, full, full_table).empty());
}

TEST_CASE("neg table follows the 0.75-power distribution") {
  // 50 candidates with in-degree i+1
  std::vector<std::pair<NodeId, NodeId>> edges;
  const std::size_t n = 51;
  for (NodeId v = 1; v < n; ++v) {
    for (NodeId k = 0; k < v; ++k) {
      edges.push_back({static_cast<NodeId>((v + k + 1) % n), v});
    }
  }
  auto net = make_net(n, std::move(edges));
  const auto table = NegTable::for_nodes(net);

  std::vector<double> weights(n, 0.0);
  for (NodeId v = 1; v < n; ++v) weights[v] = std::pow(static_cast<double>(v), 0.75);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);

  Rng rng(7);
  const long long draws = 100000;
  std::vector<long long> observed(n, 0);
  for (long long i = 0; i < draws; ++i) ++observed[table.sample(rng)];
  REQUIRE(observed[0] == 0);  // zero in-degree is never drawn

  std::vector<long long> obs_cells(observed.begin() + 1, observed.end());
  std::vector<double> probs;
  for (NodeId v = 1; v < n; ++v) probs.push_back(weights[v] / total);
  const double stat = oracle::chi_square_stat(obs_cells, probs, draws);
  // chi-square critical value at p = 0.01 with 49 degrees of freedom
  REQUIRE(stat < 74.919);
}

TEST_CASE("uniform flag samples every node") {
  const auto net = make_net(4, {{0, 1}});
  const auto table = NegTable::for_nodes(net, 0.75, true);
  Rng rng(8);
  std::vector<long long> observed(4, 0);
  for (int i = 0; i < 40000; ++i) ++observed[table.sample(rng)];
  for (long long c : observed) {
    REQUIRE(oracle::within_3_sigma(static_cast<double>(c), 40000.0, 0.25));
  }
}

TEST_CASE("neg table rejects all-zero weights") {
  REQUIRE_THROWS_AS(NegTable(std::vector<double>{0.0, 0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(NegTable(std::vector<double>{}), std::invalid_argument);
  REQUIRE_THROWS_AS(NegTable(std::vector<double>{1.0, -2.0}), std::invalid_argument);
}
