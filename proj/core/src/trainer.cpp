#include "gdn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "gdn/metrics.hpp"

namespace gdn {
namespace {

void check_config(const MetaConfig& cfg) {
  if (!(cfg.inner_lr >= 0.0) || !(cfg.meta_lr >= 0.0))
    throw std::invalid_argument("config: learning rates must be >= 0");
  if (cfg.batch_size < 2 || cfg.batch_size % 2 != 0)
    throw std::invalid_argument("config: batch size must be even and >= 2");
  if (cfg.inner_steps < 1)
    throw std::invalid_argument("config: inner_steps must be >= 1");
  if (cfg.epochs < 0 || cfg.fine_tune_epochs < 0)
    throw std::invalid_argument("config: negative epoch count");
  if (cfg.encoder_dim < 1 || cfg.hidden_dim < 1)
    throw std::invalid_argument("config: layer widths must be >= 1");
}

ReferenceDistribution resolve_reference(const MetaConfig& cfg) {
  if (cfg.loss.reference) return *cfg.loss.reference;
  Rng rng(derive_seed(cfg.seed, kReferenceStream));
  return sample_reference(cfg.loss.prior_mean, cfg.loss.prior_std,
                          cfg.loss.sample_count, rng);
}

LossConfig resolved_loss(const MetaConfig& cfg,
                         const ReferenceDistribution& ref) {
  LossConfig loss = cfg.loss;
  loss.reference = ref;
  return loss;
}

GdnGradients zero_like(const GdnParams& p) {
  GdnGradients g;
  g.encoder_weight = Matrix(p.encoder_weight.rows(), p.encoder_weight.cols());
  g.encoder_bias.assign(p.encoder_bias.size(), 0.0);
  g.hidden_weight = Matrix(p.hidden_weight.rows(), p.hidden_weight.cols());
  g.hidden_bias.assign(p.hidden_bias.size(), 0.0);
  g.output_weight.assign(p.output_weight.size(), 0.0);
  return g;
}

// One batched gradient step; returns the new parameters and the batch loss.
std::pair<GdnParams, double> gradient_step(const GdnParams& params,
                                           const Task& task,
                                           const LossConfig& loss, int b,
                                           double lr, Rng& rng) {
  auto [batch, labels] = sample_batch(task, b, rng);
  const ScoreBatch scores = forward(params, task.propagated, batch);
  auto [value, dscore] = loss_and_grad(scores, labels, loss);
  const GdnGradients grads = backward(params, task.propagated, batch, dscore);
  return {apply_gradient_step(params, grads, lr), value};
}

void check_finite_loss(double loss, int epoch, const std::string& where) {
  if (!std::isfinite(loss))
    throw std::runtime_error(where + " diverged at epoch " +
                             std::to_string(epoch) + ": non-finite loss");
}

}  // namespace

void validate_task(const Task& task) {
  const auto n = static_cast<NodeId>(task.propagated.values.rows());
  if (task.labeled.empty())
    throw std::invalid_argument("task " + task.name +
                                ": needs at least one labeled anomaly");
  if (task.labeled.size() > task.unlabeled.size())
    throw std::invalid_argument("task " + task.name +
                                ": labeled pool larger than unlabeled pool");
  std::unordered_set<NodeId> seen;
  for (NodeId v : task.labeled) {
    if (v < 0 || v >= n)
      throw std::invalid_argument("task " + task.name +
                                  ": labeled node out of range");
    seen.insert(v);
  }
  for (NodeId v : task.unlabeled) {
    if (v < 0 || v >= n)
      throw std::invalid_argument("task " + task.name +
                                  ": unlabeled node out of range");
    if (seen.count(v))
      throw std::invalid_argument("task " + task.name +
                                  ": labeled/unlabeled pools overlap");
  }
}

std::pair<std::vector<NodeId>, std::vector<int>> sample_batch(const Task& task,
                                                              int b,
                                                              Rng& rng) {
  if (b < 2 || b % 2 != 0)
    throw std::invalid_argument("sample_batch: batch size must be even");
  const std::size_t half = static_cast<std::size_t>(b) / 2;
  if (task.unlabeled.size() < half)
    throw std::invalid_argument(
        "sample_batch: unlabeled pool of task " + task.name +
        " smaller than half batch (" + std::to_string(task.unlabeled.size()) +
        " < " + std::to_string(half) + ")");
  if (task.labeled.empty())
    throw std::invalid_argument("sample_batch: empty labeled pool");

  std::vector<NodeId> batch =
      task.labeled.size() >= half
          ? rng.sample(task.labeled, half)
          : rng.sample_with_replacement(task.labeled, half);
  const std::vector<NodeId> normals = rng.sample(task.unlabeled, half);
  batch.insert(batch.end(), normals.begin(), normals.end());

  std::vector<int> labels(static_cast<std::size_t>(b), 0);
  std::fill(labels.begin(), labels.begin() + static_cast<long>(half), 1);
  return {std::move(batch), std::move(labels)};
}

GdnParams inner_adapt(const GdnParams& params, const Task& task,
                      const MetaConfig& cfg, Rng& rng) {
  check_config(cfg);
  const LossConfig loss = resolved_loss(cfg, resolve_reference(cfg));
  GdnParams theta = params;
  for (int step = 0; step < cfg.inner_steps; ++step)
    theta = gradient_step(theta, task, loss, cfg.batch_size, cfg.inner_lr, rng)
                .first;
  return theta;
}

TrainState meta_epoch(TrainState state, const std::vector<Task>& tasks,
                      const MetaConfig& cfg) {
  check_config(cfg);
  if (tasks.empty()) throw std::invalid_argument("meta_epoch: no tasks");
  const LossConfig loss = resolved_loss(cfg, state.reference);
  MetaConfig inner_cfg = cfg;
  inner_cfg.loss.reference = state.reference;

  GdnGradients total = zero_like(state.params);
  std::vector<double> task_losses;
  task_losses.reserve(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    Rng inner_rng(
        derive_seed(state.seed, kInnerBatchStream, i, state.epoch));
    const GdnParams adapted =
        inner_adapt(state.params, tasks[i], inner_cfg, inner_rng);

    Rng meta_rng(derive_seed(state.seed, kMetaBatchStream, i, state.epoch));
    auto [batch, labels] = sample_batch(tasks[i], cfg.batch_size, meta_rng);
    const ScoreBatch scores = forward(adapted, tasks[i].propagated, batch);
    auto [value, dscore] = loss_and_grad(scores, labels, loss);
    accumulate(total,
               backward(adapted, tasks[i].propagated, batch, dscore));
    task_losses.push_back(value);
  }
  state.params = apply_gradient_step(state.params, total, cfg.meta_lr);

  double mean = 0.0;
  for (double v : task_losses) mean += v;
  mean /= static_cast<double>(task_losses.size());
  check_finite_loss(mean, state.epoch, "meta training");
  state.loss_history.push_back(mean);
  state.last_task_losses = std::move(task_losses);
  ++state.epoch;
  return state;
}

GdnParams train_meta(const std::vector<Task>& aux_tasks, const MetaConfig& cfg,
                     const EpochCallback& log, const SnapshotCallback& snapshot) {
  check_config(cfg);
  if (aux_tasks.empty()) throw std::invalid_argument("train_meta: no tasks");
  const std::size_t d = aux_tasks.front().propagated.values.cols();
  for (const Task& t : aux_tasks) {
    validate_task(t);
    if (t.propagated.values.cols() != d)
      throw std::invalid_argument("train_meta: feature dims differ across "
                                  "tasks");
  }

  TrainState state;
  Rng init_rng(derive_seed(cfg.seed, kInitStream));
  state.params = init_params(d, cfg.encoder_dim, cfg.hidden_dim, init_rng);
  state.seed = cfg.seed;
  state.reference = resolve_reference(cfg);
  for (int e = 0; e < cfg.epochs; ++e) {
    state = meta_epoch(std::move(state), aux_tasks, cfg);
    if (log)
      log(state.epoch - 1, state.last_task_losses, state.loss_history.back());
    if (snapshot) snapshot(state.epoch - 1, state.params);
  }
  return state.params;
}

GdnParams fine_tune(const GdnParams& params, const Task& target,
                    const MetaConfig& cfg, const ValidationSet* validation,
                    const EpochCallback& log) {
  check_config(cfg);
  validate_task(target);
  const LossConfig loss = resolved_loss(cfg, resolve_reference(cfg));

  auto validation_auc = [&](const GdnParams& p) {
    const ScoreBatch s = score_nodes(p, target.propagated, validation->indices);
    return auc_roc({s.node_indices, s.scores, validation->labels});
  };

  GdnParams current = params;
  GdnParams best = params;
  double best_auc = validation ? validation_auc(params) : 0.0;
  for (int e = 0; e < cfg.fine_tune_epochs; ++e) {
    Rng rng(derive_seed(cfg.seed, kFineTuneStream, e));
    auto [next, value] =
        gradient_step(current, target, loss, cfg.batch_size, cfg.inner_lr, rng);
    check_finite_loss(value, e, "fine-tuning");
    current = std::move(next);
    if (validation) {
      const double auc = validation_auc(current);
      if (auc > best_auc) {
        best_auc = auc;
        best = current;
      }
    }
    if (log) log(e, {value}, value);
  }
  return validation ? best : current;
}

GdnParams train_single(const Task& task, const MetaConfig& cfg,
                       const EpochCallback& log,
                       const SnapshotCallback& snapshot) {
  check_config(cfg);
  validate_task(task);
  const std::size_t d = task.propagated.values.cols();

  Rng init_rng(derive_seed(cfg.seed, kInitStream));
  GdnParams params = init_params(d, cfg.encoder_dim, cfg.hidden_dim, init_rng);
  const LossConfig loss = resolved_loss(cfg, resolve_reference(cfg));
  // Batch streams match the meta-update streams of a one-task setup, so
  // meta-training with inner_lr 0 and a single task walks the exact same
  // trajectory as this loop at rate meta_lr.
  for (int e = 0; e < cfg.epochs; ++e) {
    Rng rng(derive_seed(cfg.seed, kMetaBatchStream, 0, e));
    auto [next, value] =
        gradient_step(params, task, loss, cfg.batch_size, cfg.inner_lr, rng);
    check_finite_loss(value, e, "training");
    params = std::move(next);
    if (log) log(e, {value}, value);
    if (snapshot) snapshot(e, params);
  }
  return params;
}

Task set_contamination(const Task& task, double r_c, Rng& rng) {
  if (!(r_c >= 0.0) || r_c >= 1.0)
    throw std::invalid_argument("set_contamination: ratio must be in [0,1)");
  const std::unordered_set<NodeId> truth(task.ground_truth.begin(),
                                         task.ground_truth.end());
  std::vector<NodeId> anomalous, normal;
  for (NodeId v : task.unlabeled)
    (truth.count(v) ? anomalous : normal).push_back(v);
  const auto a_have = static_cast<double>(anomalous.size());
  const auto n_have = static_cast<double>(normal.size());
  if (task.unlabeled.empty())
    throw std::invalid_argument("set_contamination: empty unlabeled pool");

  const double current = a_have / (a_have + n_have);
  std::unordered_set<NodeId> keep(task.unlabeled.begin(),
                                  task.unlabeled.end());
  if (r_c < current) {
    // Drop unlabeled anomalies down to the requested share.
    const auto want = static_cast<std::size_t>(
        std::llround(r_c * n_have / (1.0 - r_c)));
    const std::vector<NodeId> kept = rng.sample(anomalous, want);
    std::unordered_set<NodeId> kept_set(kept.begin(), kept.end());
    for (NodeId v : anomalous)
      if (!kept_set.count(v)) keep.erase(v);
  } else if (r_c > current) {
    if (anomalous.empty())
      throw std::invalid_argument(
          "set_contamination: no unlabeled anomalies, ratio unreachable");
    const auto want = static_cast<std::size_t>(
        std::llround(a_have * (1.0 - r_c) / r_c));
    if (want > normal.size())
      throw std::invalid_argument("set_contamination: ratio unreachable");
    const std::vector<NodeId> kept = rng.sample(normal, want);
    std::unordered_set<NodeId> kept_set(kept.begin(), kept.end());
    for (NodeId v : normal)
      if (!kept_set.count(v)) keep.erase(v);
  }

  Task out = task;
  out.unlabeled.clear();
  for (NodeId v : task.unlabeled)
    if (keep.count(v)) out.unlabeled.push_back(v);
  if (out.unlabeled.empty())
    throw std::invalid_argument("set_contamination: pool emptied");
  return out;
}

ScoreBatch score_nodes(const GdnParams& params,
                       const PropagatedFeatures& feats,
                       const std::vector<NodeId>& indices) {
  return forward(params, feats, indices);
}

}  // namespace gdn
