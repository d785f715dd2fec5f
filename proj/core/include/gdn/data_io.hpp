#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdn/graph.hpp"
#include "gdn/rng.hpp"

namespace gdn {

enum class AnomalyType { kGeneric, kStructural, kContextual };

struct LabeledAnomaly {
  NodeId node = 0;
  AnomalyType type = AnomalyType::kGeneric;
};

// On-disk layout: a directory with edges.tsv (one unordered pair per line),
// features.csv (row i = node i, full-precision decimals), labels.csv
// ("node_id,tag" with tag 1 | structural | contextual), meta.json
// ({n, d, name}).
struct Bundle {
  AttributedGraph graph;
  std::vector<LabeledAnomaly> anomalies;
  std::string name;
  BuildStats stats;  // cleanup counters from the last load
};

Bundle load_bundle(const std::string& dir);
void save_bundle(const Bundle& bundle, const std::string& dir);

std::vector<NodeId> anomaly_ids(const std::vector<LabeledAnomaly>& anomalies);

// Uniform random node assignment into `parts` sub-networks with sizes
// differing by at most one; each part keeps internal edges only and is
// re-indexed densely in increasing original-id order (original ids are
// recorded as external_ids).
std::vector<AttributedGraph> partition_network(const AttributedGraph& graph,
                                               int parts, Rng& rng);

// Maps global node ids into a part's local ids, dropping ids that fall
// outside the part. Result is sorted by local id.
std::vector<NodeId> localize(const AttributedGraph& part,
                             const std::vector<NodeId>& global_ids);

struct SplitSpec {
  double fine_tune_fraction = 0.4;
  double validation_fraction = 0.2;
  double test_fraction = 0.4;
  std::uint64_t seed = 0;
};

struct TargetSplit {
  std::vector<NodeId> fine_tune;
  std::vector<NodeId> validation;
  std::vector<NodeId> test;
};

// Disjoint random cover with largest-remainder rounding; remainder ties go
// to the earlier split (fine-tune, validation, test order). Any empty split
// is a configuration error.
TargetSplit split_target(const std::vector<NodeId>& nodes,
                         const SplitSpec& spec, Rng& rng);

// Uniform sample without replacement of `shots` labeled anomalies; sorted.
std::vector<NodeId> select_shots(const std::vector<NodeId>& anomalies,
                                 int shots, Rng& rng);

// Stochastic block model with Gaussian features. Node i belongs to block
// i % blocks; the block mean is feature_shift on coordinate (block % d) and
// zero elsewhere.
struct SynthSpec {
  NodeId n = 2000;
  std::size_t d = 32;
  int blocks = 4;
  double intra_p = 0.02;
  double inter_p = 0.002;
  double feature_shift = 3.0;
  std::uint64_t seed = 0;
  std::string name = "synthetic";
};

AttributedGraph generate_synthetic(const SynthSpec& spec, Rng& rng);

}  // namespace gdn
