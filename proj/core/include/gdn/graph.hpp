#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gdn/matrix.hpp"

namespace gdn {

using NodeId = std::int32_t;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
};

// Counters for input cleanup during graph construction.
struct BuildStats {
  std::size_t duplicate_edges = 0;
  std::size_t self_loops = 0;
};

// Undirected attributed graph in CSR form. Adjacency is symmetric,
// deduplicated, and stores no self-loops; features are dense n x d.
// Immutable after build() except for feature overwrites (contextual
// injection rewrites attribute rows, never the adjacency).
class AttributedGraph {
 public:
  AttributedGraph() = default;

  // Symmetrizes, removes duplicate pairs, drops self-loops. Counts of
  // dropped input lines land in stats when given.
  static AttributedGraph build(NodeId num_nodes, const std::vector<Edge>& edges,
                               Matrix features, BuildStats* stats = nullptr);

  NodeId num_nodes() const { return n_; }
  std::size_t num_directed_entries() const { return col_.size(); }
  std::size_t num_edges() const { return col_.size() / 2; }

  std::size_t degree(NodeId u) const {
    return row_ptr_[static_cast<std::size_t>(u) + 1] -
           row_ptr_[static_cast<std::size_t>(u)];
  }
  std::span<const NodeId> neighbors(NodeId u) const {
    return {col_.data() + row_ptr_[static_cast<std::size_t>(u)],
            col_.data() + row_ptr_[static_cast<std::size_t>(u) + 1]};
  }
  bool has_edge(NodeId u, NodeId v) const;

  const Matrix& features() const { return features_; }
  Matrix& mutable_features() { return features_; }

  // Each unordered pair once, u < v, sorted lexicographically.
  std::vector<Edge> edge_list() const;

  // Original node ids when this graph is a re-indexed sub-network;
  // empty means identity.
  const std::vector<NodeId>& external_ids() const { return external_ids_; }
  void set_external_ids(std::vector<NodeId> ids) {
    external_ids_ = std::move(ids);
  }

  // Throws std::runtime_error on any structural invariant violation.
  void validate() const;

 private:
  NodeId n_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<NodeId> col_;
  Matrix features_;
  std::vector<NodeId> external_ids_;
};

// Symmetrically normalized adjacency with self-loops,
// S = D^{-1/2} (A + I) D^{-1/2}, D = diag(deg + 1). CSR with weights.
struct NormalizedAdjacency {
  NodeId num_nodes = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<NodeId> col;
  std::vector<double> val;
};

NormalizedAdjacency normalize_adjacency(const AttributedGraph& graph);

// Sparse-dense product S * M.
Matrix spmm(const NormalizedAdjacency& s, const Matrix& m);

// Feature matrix after K propagation steps, computed as S^K X.
struct PropagatedFeatures {
  Matrix values;
  int degree = 0;
};

PropagatedFeatures propagate(const NormalizedAdjacency& s, const Matrix& x,
                             int k);

}  // namespace gdn
