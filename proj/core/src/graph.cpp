#include "gdn/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace gdn {

AttributedGraph AttributedGraph::build(NodeId num_nodes,
                                       const std::vector<Edge>& edges,
                                       Matrix features, BuildStats* stats) {
  if (num_nodes < 0) throw std::invalid_argument("build: negative node count");
  if (features.rows() != static_cast<std::size_t>(num_nodes))
    throw std::invalid_argument(
        "build: feature rows (" + std::to_string(features.rows()) +
        ") != num_nodes (" + std::to_string(num_nodes) + ")");
  if (!features.all_finite())
    throw std::invalid_argument("build: non-finite feature value");

  BuildStats local{};
  std::vector<Edge> pairs;
  pairs.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u < 0 || e.u >= num_nodes || e.v < 0 || e.v >= num_nodes)
      throw std::out_of_range("build: edge endpoint out of range: " +
                              std::to_string(e.u) + "-" + std::to_string(e.v));
    if (e.u == e.v) {
      ++local.self_loops;
      continue;
    }
    pairs.push_back(e.u < e.v ? e : Edge{e.v, e.u});
  }
  std::sort(pairs.begin(), pairs.end(), [](const Edge& a, const Edge& b) {
    return a.u < b.u || (a.u == b.u && a.v < b.v);
  });
  std::size_t unique = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (unique > 0 && pairs[i].u == pairs[unique - 1].u &&
        pairs[i].v == pairs[unique - 1].v) {
      ++local.duplicate_edges;
      continue;
    }
    pairs[unique++] = pairs[i];
  }
  pairs.resize(unique);
  if (stats) *stats = local;

  AttributedGraph g;
  g.n_ = num_nodes;
  g.features_ = std::move(features);
  g.row_ptr_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  for (const Edge& e : pairs) {
    ++g.row_ptr_[static_cast<std::size_t>(e.u) + 1];
    ++g.row_ptr_[static_cast<std::size_t>(e.v) + 1];
  }
  for (std::size_t i = 1; i < g.row_ptr_.size(); ++i)
    g.row_ptr_[i] += g.row_ptr_[i - 1];
  g.col_.resize(pairs.size() * 2);
  std::vector<std::size_t> cursor(g.row_ptr_.begin(), g.row_ptr_.end() - 1);
  for (const Edge& e : pairs) {
    g.col_[cursor[static_cast<std::size_t>(e.u)]++] = e.v;
    g.col_[cursor[static_cast<std::size_t>(e.v)]++] = e.u;
  }
  // Each row is already sorted: pairs are sorted by (u, v), and for the
  // reversed direction entries arrive in increasing u per fixed v.
  return g;
}

bool AttributedGraph::has_edge(NodeId u, NodeId v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> AttributedGraph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < n_; ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.push_back({u, v});
  return out;
}

void AttributedGraph::validate() const {
  if (row_ptr_.size() != static_cast<std::size_t>(n_) + 1)
    throw std::runtime_error("validate: row offset length");
  if (row_ptr_.front() != 0 || row_ptr_.back() != col_.size())
    throw std::runtime_error("validate: row offset bounds");
  for (std::size_t i = 1; i < row_ptr_.size(); ++i)
    if (row_ptr_[i] < row_ptr_[i - 1])
      throw std::runtime_error("validate: decreasing row offsets");
  if (features_.rows() != static_cast<std::size_t>(n_))
    throw std::runtime_error("validate: feature row count");
  if (!features_.all_finite())
    throw std::runtime_error("validate: non-finite feature");
  for (NodeId u = 0; u < n_; ++u) {
    const auto nb = neighbors(u);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const NodeId v = nb[i];
      if (v < 0 || v >= n_)
        throw std::runtime_error("validate: column index out of range");
      if (v == u) throw std::runtime_error("validate: self-loop stored");
      if (i > 0 && nb[i] <= nb[i - 1])
        throw std::runtime_error("validate: row not strictly sorted");
      if (!has_edge(v, u))
        throw std::runtime_error("validate: asymmetric adjacency");
    }
  }
}

NormalizedAdjacency normalize_adjacency(const AttributedGraph& graph) {
  const NodeId n = graph.num_nodes();
  std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
  for (NodeId u = 0; u < n; ++u)
    inv_sqrt[static_cast<std::size_t>(u)] =
        1.0 / std::sqrt(static_cast<double>(graph.degree(u)) + 1.0);

  NormalizedAdjacency s;
  s.num_nodes = n;
  s.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  s.col.reserve(graph.num_directed_entries() + static_cast<std::size_t>(n));
  s.val.reserve(s.col.capacity());
  for (NodeId u = 0; u < n; ++u) {
    bool placed_diag = false;
    for (NodeId v : graph.neighbors(u)) {
      if (!placed_diag && v > u) {
        s.col.push_back(u);
        s.val.push_back(inv_sqrt[static_cast<std::size_t>(u)] *
                        inv_sqrt[static_cast<std::size_t>(u)]);
        placed_diag = true;
      }
      s.col.push_back(v);
      s.val.push_back(inv_sqrt[static_cast<std::size_t>(u)] *
                      inv_sqrt[static_cast<std::size_t>(v)]);
    }
    if (!placed_diag) {
      s.col.push_back(u);
      s.val.push_back(inv_sqrt[static_cast<std::size_t>(u)] *
                      inv_sqrt[static_cast<std::size_t>(u)]);
    }
    s.row_ptr[static_cast<std::size_t>(u) + 1] = s.col.size();
  }
  return s;
}

Matrix spmm(const NormalizedAdjacency& s, const Matrix& m) {
  if (m.rows() != static_cast<std::size_t>(s.num_nodes))
    throw std::invalid_argument("spmm: row count mismatch");
  Matrix out(m.rows(), m.cols());
  for (NodeId i = 0; i < s.num_nodes; ++i) {
    double* orow = out.row(static_cast<std::size_t>(i));
    for (std::size_t e = s.row_ptr[static_cast<std::size_t>(i)];
         e < s.row_ptr[static_cast<std::size_t>(i) + 1]; ++e) {
      const double w = s.val[e];
      const double* mrow = m.row(static_cast<std::size_t>(s.col[e]));
      for (std::size_t j = 0; j < m.cols(); ++j) orow[j] += w * mrow[j];
    }
  }
  return out;
}

PropagatedFeatures propagate(const NormalizedAdjacency& s, const Matrix& x,
                             int k) {
  if (k < 0) throw std::invalid_argument("propagate: negative degree");
  if (x.rows() != static_cast<std::size_t>(s.num_nodes))
    throw std::invalid_argument("propagate: row count mismatch");
  PropagatedFeatures out{x, k};
  for (int step = 0; step < k; ++step) out.values = spmm(s, out.values);
  return out;
}

}  // namespace gdn
