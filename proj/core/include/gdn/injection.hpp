#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gdn/graph.hpp"
#include "gdn/rng.hpp"

namespace gdn {

struct InjectionSpec {
  int clique_size = 15;
  int num_cliques = 0;
  int num_contextual = 0;
  int candidate_pool = 50;
  std::uint64_t seed = 0;
};

struct InjectionReport {
  std::vector<NodeId> structural_anomalies;
  std::vector<NodeId> contextual_anomalies;
  AttributedGraph graph;
};

// Wires num_cliques groups of c nodes (drawn without replacement across
// cliques) into full cliques. Never removes edges.
std::pair<AttributedGraph, std::vector<NodeId>> inject_structural(
    const AttributedGraph& graph, int num_cliques, int c, Rng& rng);

// Repeats count times: pick an uninjected node i (also skipping `exclude`),
// sample `pool` distinct other nodes, and overwrite x_i with the candidate
// attributes farthest from x_i in Euclidean distance (ties to the lowest
// node index). Adjacency untouched.
std::pair<AttributedGraph, std::vector<NodeId>> inject_contextual(
    const AttributedGraph& graph, int count, int pool, Rng& rng,
    const std::vector<NodeId>& exclude = {});

// Structural then contextual, targeting target_rate * n total anomalies
// split evenly; the structural half is floored to whole cliques and the
// remainder goes to the contextual side. The two sets are disjoint.
InjectionReport inject_combined(const AttributedGraph& graph,
                                double target_rate, const InjectionSpec& spec,
                                Rng& rng);

}  // namespace gdn
