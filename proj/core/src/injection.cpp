#include "gdn/injection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace gdn {

std::pair<AttributedGraph, std::vector<NodeId>> inject_structural(
    const AttributedGraph& graph, int num_cliques, int c, Rng& rng) {
  if (c < 2) throw std::invalid_argument("inject_structural: clique size < 2");
  if (num_cliques < 0)
    throw std::invalid_argument("inject_structural: negative clique count");
  const std::size_t need =
      static_cast<std::size_t>(num_cliques) * static_cast<std::size_t>(c);
  if (need > static_cast<std::size_t>(graph.num_nodes()))
    throw std::invalid_argument(
        "inject_structural: " + std::to_string(need) +
        " clique slots exceed " + std::to_string(graph.num_nodes()) +
        " nodes");

  std::vector<NodeId> all(static_cast<std::size_t>(graph.num_nodes()));
  for (std::size_t i = 0; i < all.size(); ++i)
    all[i] = static_cast<NodeId>(i);
  const std::vector<NodeId> chosen = rng.sample(all, need);

  std::vector<Edge> edges = graph.edge_list();
  for (int q = 0; q < num_cliques; ++q) {
    const NodeId* members = chosen.data() + static_cast<std::size_t>(q) * c;
    for (int a = 0; a < c; ++a)
      for (int b = a + 1; b < c; ++b)
        edges.push_back({members[a], members[b]});
  }
  AttributedGraph out = AttributedGraph::build(graph.num_nodes(), edges,
                                               graph.features());
  return {std::move(out), chosen};
}

std::pair<AttributedGraph, std::vector<NodeId>> inject_contextual(
    const AttributedGraph& graph, int count, int pool, Rng& rng,
    const std::vector<NodeId>& exclude) {
  if (count < 0)
    throw std::invalid_argument("inject_contextual: negative count");
  if (pool < 1)
    throw std::invalid_argument("inject_contextual: empty candidate pool");
  const auto n = static_cast<std::size_t>(graph.num_nodes());
  if (static_cast<std::size_t>(count) + static_cast<std::size_t>(pool) > n)
    throw std::invalid_argument(
        "inject_contextual: count + pool exceeds node count");

  std::unordered_set<NodeId> taken(exclude.begin(), exclude.end());
  AttributedGraph out = AttributedGraph::build(graph.num_nodes(),
                                               graph.edge_list(),
                                               graph.features());
  Matrix& feats = out.mutable_features();
  const std::size_t d = feats.cols();

  std::vector<NodeId> injected;
  injected.reserve(static_cast<std::size_t>(count));
  std::vector<NodeId> eligible, candidates;
  for (int it = 0; it < count; ++it) {
    eligible.clear();
    for (NodeId v = 0; v < graph.num_nodes(); ++v)
      if (!taken.count(v)) eligible.push_back(v);
    if (eligible.empty())
      throw std::invalid_argument("inject_contextual: no eligible nodes left");
    const NodeId i = eligible[static_cast<std::size_t>(rng.uniform_int(
        0, static_cast<std::int64_t>(eligible.size()) - 1))];

    candidates.clear();
    for (NodeId v = 0; v < graph.num_nodes(); ++v)
      if (v != i) candidates.push_back(v);
    candidates = rng.sample(candidates, static_cast<std::size_t>(pool));
    std::sort(candidates.begin(), candidates.end());

    const double* xi = feats.row(static_cast<std::size_t>(i));
    NodeId best = candidates.front();
    double best_dist = -1.0;
    for (NodeId j : candidates) {
      const double* xj = feats.row(static_cast<std::size_t>(j));
      double dist = 0.0;
      for (std::size_t k = 0; k < d; ++k)
        dist += (xi[k] - xj[k]) * (xi[k] - xj[k]);
      if (dist > best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    const double* xb = feats.row(static_cast<std::size_t>(best));
    double* dst = feats.row(static_cast<std::size_t>(i));
    for (std::size_t k = 0; k < d; ++k) dst[k] = xb[k];

    taken.insert(i);
    injected.push_back(i);
  }
  return {std::move(out), std::move(injected)};
}

InjectionReport inject_combined(const AttributedGraph& graph,
                                double target_rate, const InjectionSpec& spec,
                                Rng& rng) {
  const auto n = static_cast<double>(graph.num_nodes());
  if (!(target_rate > 0.0) || target_rate * n < 2.0)
    throw std::invalid_argument("inject_combined: rate too small");
  if (target_rate > 1.0)
    throw std::invalid_argument("inject_combined: rate above 1");

  const auto per_type =
      static_cast<std::int64_t>(std::llround(target_rate * n / 2.0));
  const std::int64_t cliques = per_type / spec.clique_size;
  const std::int64_t structural_count = cliques * spec.clique_size;
  const std::int64_t contextual_count = 2 * per_type - structural_count;
  if (structural_count + contextual_count >
      static_cast<std::int64_t>(graph.num_nodes()))
    throw std::invalid_argument("inject_combined: rate too large for graph");

  auto [with_cliques, structural] = inject_structural(
      graph, static_cast<int>(cliques), spec.clique_size, rng);
  auto [perturbed, contextual] = inject_contextual(
      with_cliques, static_cast<int>(contextual_count), spec.candidate_pool,
      rng, structural);

  InjectionReport report;
  report.structural_anomalies = std::move(structural);
  report.contextual_anomalies = std::move(contextual);
  report.graph = std::move(perturbed);
  report.graph.validate();
  return report;
}

}  // namespace gdn
