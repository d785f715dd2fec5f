#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gdn/deviation.hpp"
#include "gdn/graph.hpp"
#include "gdn/model.hpp"
#include "gdn/rng.hpp"

namespace gdn {

// Salts for derive_seed so every consumer draws from its own stream. Batch
// streams are keyed by (purpose, task index, epoch): sampling never depends
// on how many draws another component made.
enum Stream : std::uint64_t {
  kInitStream = 1,
  kReferenceStream = 2,
  kInnerBatchStream = 3,
  kMetaBatchStream = 4,
  kFineTuneStream = 5,
  kRunStream = 6,
  kSynthStream = 7,
  kInjectStream = 8,
  kSplitStream = 9,
  kShotStream = 10,
  kContaminationStream = 11,
  kBaselineStream = 12,
};

// One network's training view: propagated features plus the labeled /
// unlabeled node pools. ground_truth is evaluation metadata (the full
// injected-anomaly set) and is never read by training.
struct Task {
  AttributedGraph graph;
  PropagatedFeatures propagated;
  std::vector<NodeId> labeled;    // known anomalies
  std::vector<NodeId> unlabeled;  // treated as normal
  std::vector<NodeId> ground_truth;
  std::string name;
};

// Throws unless the labeled/unlabeled pools are disjoint, in range, and
// |labeled| is at least 1 and at most |unlabeled|.
void validate_task(const Task& task);

struct MetaConfig {
  double inner_lr = 0.01;   // alpha
  double meta_lr = 0.001;   // beta
  int inner_steps = 5;
  int epochs = 1000;
  int batch_size = 16;      // must be even
  int num_aux = 4;          // P
  int fine_tune_epochs = 100;
  std::size_t encoder_dim = 64;   // h_e
  std::size_t hidden_dim = 512;   // h_v
  LossConfig loss;
  std::uint64_t seed = 0;
};

struct TrainState {
  GdnParams params;
  int epoch = 0;
  std::uint64_t seed = 0;
  ReferenceDistribution reference;
  std::vector<double> loss_history;
  std::vector<double> last_task_losses;
};

// Called once per epoch with the per-task losses and their mean.
using EpochCallback =
    std::function<void(int epoch, const std::vector<double>& task_losses,
                       double mean_loss)>;

// Called once per epoch with the updated parameters (interval checkpoints).
using SnapshotCallback = std::function<void(int epoch, const GdnParams&)>;

// Half labeled anomalies (label 1, drawn first), half unlabeled (label 0).
// The labeled half falls back to with-replacement draws when the pool is
// smaller than b/2; the unlabeled half never does.
std::pair<std::vector<NodeId>, std::vector<int>> sample_batch(const Task& task,
                                                              int b, Rng& rng);

// inner_steps plain gradient steps at rate inner_lr, batches drawn from
// rng. The input parameters are left untouched.
GdnParams inner_adapt(const GdnParams& params, const Task& task,
                      const MetaConfig& cfg, Rng& rng);

// One pass over all tasks: adapt each from the shared parameters, take the
// loss gradient at the adapted parameters on a fresh batch, apply the
// summed gradients at rate meta_lr.
TrainState meta_epoch(TrainState state, const std::vector<Task>& tasks,
                      const MetaConfig& cfg);

// Full meta-training from a fresh initialization; returns the transferable
// parameter initialization.
GdnParams train_meta(const std::vector<Task>& aux_tasks, const MetaConfig& cfg,
                     const EpochCallback& log = nullptr,
                     const SnapshotCallback& snapshot = nullptr);

// Scored holdout for checkpoint selection during fine-tuning.
struct ValidationSet {
  std::vector<NodeId> indices;
  std::vector<int> labels;
};

// fine_tune_epochs batched steps at rate inner_lr on the target pools.
// With a validation set, returns the checkpoint with the best validation
// AUC-ROC, the incoming parameters counting as the epoch-0 candidate (ties
// keep the earlier one); otherwise the final parameters.
GdnParams fine_tune(const GdnParams& params, const Task& target,
                    const MetaConfig& cfg,
                    const ValidationSet* validation = nullptr,
                    const EpochCallback& log = nullptr);

// Plain batched gradient descent on one network at rate inner_lr for
// `epochs` epochs; the no-meta-learning baseline.
GdnParams train_single(const Task& task, const MetaConfig& cfg,
                       const EpochCallback& log = nullptr,
                       const SnapshotCallback& snapshot = nullptr);

// Subsamples the unlabeled pool (never relabeling anything) so anomalies
// make up fraction r_c of it, using ground_truth to tell which unlabeled
// nodes are anomalous. Removal only: to lower the ratio unlabeled anomalies
// are dropped, to raise it normal nodes are.
Task set_contamination(const Task& task, double r_c, Rng& rng);

// Scores every node in `indices` with the given parameters.
ScoreBatch score_nodes(const GdnParams& params, const PropagatedFeatures& feats,
                       const std::vector<NodeId>& indices);

}  // namespace gdn
