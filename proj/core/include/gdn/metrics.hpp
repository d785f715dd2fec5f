#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "gdn/graph.hpp"
#include "gdn/rng.hpp"

namespace gdn {

// Scores with aligned 0/1 ground truth. Ranking order everywhere is
// score descending, index ascending on ties.
struct RankedScores {
  std::vector<NodeId> node_indices;
  std::vector<double> scores;
  std::vector<int> labels;
};

// Rank-sum AUC; tied pairs credit 1/2. Throws on single-class input.
double auc_roc(const RankedScores& r);

// Average precision over the descending-score sweep. Throws when there are
// no positives.
double auc_pr(const RankedScores& r);

// Fraction of positives among the K top-ranked nodes.
double precision_at_k(const RankedScores& r, std::size_t k);

struct MetricsReport {
  double auc_roc = 0.0;
  double auc_pr = 0.0;
  std::map<std::size_t, double> precision_at_k;
};

MetricsReport compute_metrics(const RankedScores& r,
                              const std::vector<std::size_t>& ks);

// Metrics of uniform random scores against the given labels, averaged over
// repeats. Sanity floor: AUC-ROC near 1/2.
MetricsReport random_baseline(const std::vector<int>& labels, Rng& rng,
                              int repeats, const std::vector<std::size_t>& ks);

}  // namespace gdn
