#include "gdn/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace gdn {
namespace {

void check_aligned(const RankedScores& r) {
  if (r.scores.size() != r.labels.size())
    throw std::invalid_argument("metrics: labels misaligned with scores");
  if (r.scores.empty()) throw std::invalid_argument("metrics: empty input");
  for (int y : r.labels)
    if (y != 0 && y != 1)
      throw std::invalid_argument("metrics: label outside {0,1}");
  for (double s : r.scores)
    if (!std::isfinite(s))
      throw std::invalid_argument("metrics: non-finite score");
}

std::size_t positive_count(const RankedScores& r) {
  return static_cast<std::size_t>(
      std::count(r.labels.begin(), r.labels.end(), 1));
}

// Positions sorted by (score desc, position asc); the ranking order used by
// auc_pr and precision_at_k.
std::vector<std::size_t> descending_order(const RankedScores& r) {
  std::vector<std::size_t> order(r.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (r.scores[a] != r.scores[b]) return r.scores[a] > r.scores[b];
    return a < b;
  });
  return order;
}

}  // namespace

double auc_roc(const RankedScores& r) {
  check_aligned(r);
  const std::size_t n = r.scores.size();
  const std::size_t pos = positive_count(r);
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0)
    throw std::invalid_argument("auc_roc: needs both classes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return r.scores[a] < r.scores[b];
  });

  // Average ranks within tie groups; rank sums stay exact (half-integers).
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && r.scores[order[j + 1]] == r.scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) +
                             static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t)
      if (r.labels[order[t]] == 1) pos_rank_sum += avg_rank;
    i = j + 1;
  }
  const double u = pos_rank_sum -
                   static_cast<double>(pos) * static_cast<double>(pos + 1) / 2.0;
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

double auc_pr(const RankedScores& r) {
  check_aligned(r);
  const std::size_t pos = positive_count(r);
  if (pos == 0) throw std::invalid_argument("auc_pr: no positives");

  const auto order = descending_order(r);
  double sum = 0.0;
  std::size_t tp = 0;
  for (std::size_t k = 1; k <= order.size(); ++k) {
    if (r.labels[order[k - 1]] == 1) {
      ++tp;
      sum += static_cast<double>(tp) / static_cast<double>(k);
    }
  }
  return sum / static_cast<double>(pos);
}

double precision_at_k(const RankedScores& r, std::size_t k) {
  check_aligned(r);
  if (k < 1 || k > r.scores.size())
    throw std::invalid_argument("precision_at_k: K out of range");
  const auto order = descending_order(r);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i)
    if (r.labels[order[i]] == 1) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

MetricsReport compute_metrics(const RankedScores& r,
                              const std::vector<std::size_t>& ks) {
  MetricsReport rep;
  rep.auc_roc = auc_roc(r);
  rep.auc_pr = auc_pr(r);
  for (std::size_t k : ks)
    if (k >= 1 && k <= r.scores.size())
      rep.precision_at_k[k] = precision_at_k(r, k);
  return rep;
}

MetricsReport random_baseline(const std::vector<int>& labels, Rng& rng,
                              int repeats, const std::vector<std::size_t>& ks) {
  if (repeats < 1)
    throw std::invalid_argument("random_baseline: repeats must be >= 1");
  MetricsReport acc;
  for (std::size_t k : ks)
    if (k >= 1 && k <= labels.size()) acc.precision_at_k[k] = 0.0;
  for (int rep = 0; rep < repeats; ++rep) {
    RankedScores r;
    r.labels = labels;
    r.scores.resize(labels.size());
    r.node_indices.resize(labels.size());
    std::iota(r.node_indices.begin(), r.node_indices.end(), NodeId{0});
    for (double& s : r.scores) s = rng.uniform();
    acc.auc_roc += auc_roc(r);
    acc.auc_pr += auc_pr(r);
    for (auto& [k, v] : acc.precision_at_k) v += precision_at_k(r, k);
  }
  acc.auc_roc /= repeats;
  acc.auc_pr /= repeats;
  for (auto& [k, v] : acc.precision_at_k) v /= repeats;
  return acc;
}

}  // namespace gdn
