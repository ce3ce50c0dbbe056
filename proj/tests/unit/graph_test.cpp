#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include <topolearn/error.hpp>
#include <topolearn/graph.hpp>
#include <topolearn/instances.hpp>

#include "oracles.hpp"

namespace topolearn {
namespace {

UndirectedGraph star(std::size_t leaves_count) {
  UndirectedGraph g(leaves_count + 1);
  for (NodeId l = 1; l <= leaves_count; ++l) g.add_edge(0, l);
  return g;
}

TEST(UndirectedGraph, RejectsSelfLoopsAndBadIndices) {
  UndirectedGraph g(3);
  EXPECT_THROW(g.add_edge(1, 1), std::invalid_argument);
  EXPECT_THROW(g.add_edge(0, 3), std::out_of_range);
  g.add_edge(2, 0);
  g.add_edge(0, 2);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_TRUE(g.has_edge(0, 2));
  EXPECT_EQ(g.edges().front(), Edge(0, 2));
}

TEST(HopNeighbors, SevenChain) {
  const auto g = oracle::chain7();
  EXPECT_EQ(n_hop_neighbors(g, 3, 1), (NodeSet{2, 4}));
  EXPECT_EQ(n_hop_neighbors(g, 0, 2), (NodeSet{2}));
  UndirectedGraph isolated(4);
  isolated.add_edge(0, 1);
  EXPECT_TRUE(n_hop_neighbors(isolated, 3, 1).empty());
  EXPECT_THROW(n_hop_neighbors(g, 7, 1), std::out_of_range);
}

TEST(HopNeighbors, MatchFloydWarshallOnRandomTrees) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 30; ++rep) {
    const auto tree = random_tree(5 + rep % 16, rng);
    const auto hops = oracle::all_pairs_hops(tree);
    for (NodeId i = 0; i < tree.node_count(); ++i) {
      for (std::size_t n = 1; n <= 4; ++n) {
        NodeSet expected;
        for (NodeId j = 0; j < tree.node_count(); ++j) {
          if (hops[i][j] == n) expected.insert(j);
        }
        EXPECT_EQ(n_hop_neighbors(tree, i, n), expected);
      }
    }
  }
}

TEST(IsTree, Cases) {
  auto g = oracle::chain7();
  EXPECT_TRUE(is_tree(g));
  g.add_edge(0, 6);
  EXPECT_FALSE(is_tree(g));
  EXPECT_TRUE(is_tree(UndirectedGraph(1)));
  EXPECT_FALSE(is_tree(UndirectedGraph(2)));
  EXPECT_TRUE(is_forest(UndirectedGraph(2)));
}

TEST(MoralGraph, SevenChain) {
  EXPECT_EQ(moral_graph(oracle::chain7()).edges(), oracle::chain7_moral_edges());
}

TEST(MoralGraph, SmallCases) {
  UndirectedGraph pair(2);
  pair.add_edge(0, 1);
  EXPECT_EQ(moral_graph(pair), pair);

  const auto s = star(4);
  auto expected = s;
  for (NodeId a = 1; a <= 4; ++a) {
    for (NodeId b = a + 1; b <= 4; ++b) expected.add_edge(a, b);
  }
  EXPECT_EQ(moral_graph(s), expected);

  auto cycle = oracle::chain7();
  cycle.add_edge(0, 6);
  EXPECT_THROW(moral_graph(cycle), std::invalid_argument);
}

TEST(MoralGraph, EdgesSpanAtMostTwoHops) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    const auto tree = random_tree(2 + rep % 19, rng);
    const auto moral = moral_graph(tree);
    const auto hops = oracle::all_pairs_hops(tree);
    for (const Edge& e : tree.edges()) EXPECT_TRUE(moral.has_edge(e.a, e.b));
    for (NodeId i = 0; i < tree.node_count(); ++i) {
      for (NodeId j = i + 1; j < tree.node_count(); ++j) {
        EXPECT_EQ(moral.has_edge(i, j), hops[i][j] <= 2);
      }
    }
  }
}

TEST(PerturbedGraph, SevenChainCorruptFour) {
  const auto moral = moral_graph(oracle::chain7());
  EXPECT_EQ(perturbed_graph(moral, {3}).edges(), oracle::chain7_perturbed_edges());
  EXPECT_EQ(perturbed_graph(moral, {}), moral);
}

TEST(PerturbedGraph, SevenChainCorruptTwo) {
  const auto moral = moral_graph(oracle::chain7());
  auto expected = moral;
  expected.add_edge(0, 3);
  EXPECT_EQ(perturbed_graph(moral, {1}), expected);
}

TEST(PerturbedGraph, MatchesPathEnumerationAndIsMonotone) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 60; ++rep) {
    const auto tree = random_tree(4 + rep % 7, rng);
    const auto moral = moral_graph(tree);
    NodeSet corrupt;
    std::bernoulli_distribution coin(0.3);
    for (NodeId v = 0; v < tree.node_count(); ++v) {
      if (coin(rng)) corrupt.insert(v);
    }
    const auto got = perturbed_graph(moral, corrupt);
    EXPECT_EQ(got, oracle::perturbed_by_paths(moral, corrupt));
    EXPECT_EQ(perturbed_graph(got, {}), got);

    NodeSet wider = corrupt;
    wider.insert(std::uniform_int_distribution<NodeId>(0, tree.node_count() - 1)(rng));
    const auto bigger = perturbed_graph(moral, wider);
    for (const Edge& e : got.edges()) EXPECT_TRUE(bigger.has_edge(e.a, e.b));
  }
}

TEST(NeighborhoodClique, SevenChainPerturbed) {
  const UndirectedGraph g(7, oracle::chain7_perturbed_edges());
  EXPECT_TRUE(neighborhood_is_clique(g, 3));
  EXPECT_TRUE(neighborhood_is_clique(g, 0));
  EXPECT_TRUE(neighborhood_is_clique(g, 6));
  for (NodeId v : {1, 2, 4, 5}) EXPECT_FALSE(neighborhood_is_clique(g, v)) << v;
  UndirectedGraph pair(2);
  pair.add_edge(0, 1);
  EXPECT_TRUE(neighborhood_is_clique(pair, 0));
}

TEST(NeighborhoodClique, CliqueNodesAreLeavesAndCorruptNodes) {
  std::mt19937_64 rng(14);
  InstanceParams params;
  params.min_nodes = 7;
  params.max_nodes = 20;
  for (int rep = 0; rep < 100; ++rep) {
    const Instance inst = random_instance(params, rng);
    const auto& tree = inst.model.topology();
    const auto hops = oracle::all_pairs_hops(tree);
    const NodeSet leaf_nodes = leaves(tree);
    for (NodeId c : inst.corrupt) {
      for (NodeId l : leaf_nodes) ASSERT_GE(hops[c][l], 3u);
      for (NodeId o : inst.corrupt) ASSERT_TRUE(o == c || hops[c][o] >= 3);
    }
    const auto g = perturbed_graph(moral_graph(tree), inst.corrupt);
    for (NodeId v = 0; v < tree.node_count(); ++v) {
      EXPECT_EQ(neighborhood_is_clique(g, v), leaf_nodes.count(v) > 0 || inst.corrupt.count(v) > 0);
    }
  }
}

TEST(Separates, Cases) {
  const UndirectedGraph marginal(7, oracle::chain7_marginal_edges());
  // 1 keeps its edges to 2 and 3 only, so deleting both isolates it from 7.
  EXPECT_EQ(separates(marginal, 0, 6, {1, 2}), oracle::separated_by_paths(marginal, 0, 6, {1, 2}));
  EXPECT_TRUE(separates(marginal, 0, 6, {1, 2}));

  EXPECT_FALSE(separates(oracle::chain7(), 0, 6, {}));
  UndirectedGraph three(3);
  three.add_edge(0, 1);
  three.add_edge(1, 2);
  EXPECT_TRUE(separates(three, 0, 2, {1}));
  EXPECT_THROW(separates(three, 0, 2, {0}), std::invalid_argument);
}

TEST(Separates, MatchesPathEnumeration) {
  std::mt19937_64 rng(15);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 4 + rep % 7;
    UndirectedGraph g(n);
    std::bernoulli_distribution coin(0.35);
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = i + 1; j < n; ++j) {
        if (coin(rng)) g.add_edge(i, j);
      }
    }
    std::uniform_int_distribution<NodeId> pick(0, n - 1);
    const NodeId a = pick(rng);
    const NodeId b = pick(rng);
    NodeId c = pick(rng);
    NodeId d = pick(rng);
    const NodeSet cut{a, b};
    if (cut.count(c) || cut.count(d) || c == d) continue;
    EXPECT_EQ(separates(g, c, d, cut), oracle::separated_by_paths(g, c, d, cut));
  }
}

TEST(ConnectedComponents, Cases) {
  UndirectedGraph g(7, oracle::chain7_true_observed_edges());
  EXPECT_EQ(connected_components(g, {0, 1, 2, 4, 5, 6}), (std::vector<NodeSet>{{0, 1, 2}, {4, 5, 6}}));
  EXPECT_EQ(connected_components(oracle::chain7()).size(), 1u);
  EXPECT_EQ(connected_components(UndirectedGraph(3)), (std::vector<NodeSet>{{0}, {1}, {2}}));
}

}  // namespace
}  // namespace topolearn
