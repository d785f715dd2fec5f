#include "gdn/deviation.hpp"

#include <cmath>
#include <stdexcept>

namespace gdn {

ReferenceDistribution sample_reference(double mean, double stddev,
                                       std::size_t k, Rng& rng) {
  if (!(stddev > 0.0))
    throw std::invalid_argument("sample_reference: stddev must be > 0");
  if (k < 2) throw std::invalid_argument("sample_reference: k must be >= 2");

  std::vector<double> draws(k);
  for (double& r : draws) r = mean + stddev * rng.normal();
  double sum = 0.0;
  for (double r : draws) sum += r;
  const double mu_r = sum / static_cast<double>(k);
  double sq = 0.0;
  for (double r : draws) sq += (r - mu_r) * (r - mu_r);
  const double sigma_r = std::sqrt(sq / static_cast<double>(k));
  if (!(sigma_r > 0.0))
    throw std::runtime_error("sample_reference: degenerate sample (zero std)");

  ReferenceDistribution ref;
  ref.prior_mean = mean;
  ref.prior_std = stddev;
  ref.sample_count = k;
  ref.ref_mean = mu_r;
  ref.ref_std = sigma_r;
  return ref;
}

double deviation(double score, const ReferenceDistribution& ref) {
  return (score - ref.ref_mean) / ref.ref_std;
}

std::pair<double, std::vector<double>> loss_and_grad(
    const ScoreBatch& scores, const std::vector<int>& labels,
    const LossConfig& cfg) {
  if (labels.size() != scores.scores.size())
    throw std::invalid_argument("loss_and_grad: labels misaligned");
  if (scores.scores.empty())
    throw std::invalid_argument("loss_and_grad: empty batch");
  if (!cfg.reference)
    throw std::invalid_argument("loss_and_grad: reference not resolved");
  const ReferenceDistribution& ref = *cfg.reference;
  const double m = cfg.margin;
  const double n = static_cast<double>(scores.scores.size());

  double total = 0.0;
  std::vector<double> grad(scores.scores.size(), 0.0);
  for (std::size_t i = 0; i < scores.scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw std::invalid_argument("loss_and_grad: label outside {0,1}");
    const double dev = deviation(scores.scores[i], ref);
    if (labels[i] == 0) {
      total += std::abs(dev);
      if (dev > 0.0)
        grad[i] = 1.0 / (ref.ref_std * n);
      else if (dev < 0.0)
        grad[i] = -1.0 / (ref.ref_std * n);
    } else {
      if (dev < m) {
        total += m - dev;
        grad[i] = -1.0 / (ref.ref_std * n);
      }
    }
  }
  return {total / n, std::move(grad)};
}

}  // namespace gdn
