#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "gdn/model.hpp"
#include "gdn/rng.hpp"

namespace gdn {

// Gaussian reference the scores are standardized against. mu_r / sigma_r
// are the sample mean and population-style standard deviation (denominator
// k) of k prior draws, fixed for a whole training run.
struct ReferenceDistribution {
  double prior_mean = 0.0;
  double prior_std = 1.0;
  std::size_t sample_count = 5000;
  double ref_mean = 0.0;
  double ref_std = 1.0;
};

ReferenceDistribution sample_reference(double mean, double stddev,
                                       std::size_t k, Rng& rng);

// Margin plus (optionally resolved) reference. Trainers that receive a
// config without a resolved reference sample one from their seed stream at
// run start and keep it fixed.
struct LossConfig {
  double margin = 5.0;
  double prior_mean = 0.0;
  double prior_std = 1.0;
  std::size_t sample_count = 5000;
  std::optional<ReferenceDistribution> reference;
};

double deviation(double score, const ReferenceDistribution& ref);

// Per-node loss (1-y)*|dev| + y*max(0, margin - dev), reduced by batch
// mean. Returns the loss and its exact gradient w.r.t. each score;
// subgradient at both kinks is 0.
std::pair<double, std::vector<double>> loss_and_grad(
    const ScoreBatch& scores, const std::vector<int>& labels,
    const LossConfig& cfg);

}  // namespace gdn
