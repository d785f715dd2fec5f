#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gdn/data_io.hpp"
#include "gdn/injection.hpp"
#include "gdn/metrics.hpp"
#include "gdn/trainer.hpp"

namespace gdn {

// Full study description. Networks come from bundle directories when
// aux_bundles is non-empty, otherwise num_networks synthetic networks are
// generated per repeat (the last one is the target).
struct ExperimentConfig {
  std::vector<std::string> aux_bundles;
  std::string target_bundle;
  SynthSpec synth;
  int num_networks = 5;

  MetaConfig meta;
  InjectionSpec injection;
  double injection_rate = 0.05;
  bool inject = true;
  int degree_k = 2;
  SplitSpec split;
  int shots = 10;
  std::vector<std::size_t> metric_ks = {25, 50, 100};
  std::vector<double> contamination_levels = {0.0, 0.02, 0.05, 0.08, 0.10};
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int repeats = 5;
  // overall | ablation | shots_sweep | aux_sweep
  std::string mode = "overall";
};

ExperimentConfig default_config();
ExperimentConfig load_config(const std::string& path);
// Canonical JSON form (sorted keys); the dry-run printout and hash input.
std::string config_to_json(const ExperimentConfig& cfg);
// FNV-1a over the canonical JSON.
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Everything one repeat needs: auxiliary tasks with full labels, the
// few-shot target task, the validation holdout, and the test split.
struct PreparedData {
  std::uint64_t run_seed = 0;
  std::vector<Task> aux_tasks;
  Task target_task;
  ValidationSet validation;
  std::vector<NodeId> test_nodes;
  std::vector<int> test_labels;
  std::size_t target_anomaly_count = 0;
  std::size_t fine_tune_anomaly_count = 0;
  std::size_t validation_anomaly_count = 0;
  std::size_t test_anomaly_count = 0;
  int split_attempts = 1;
};

// Generates/loads, injects, splits, and selects shots for one repeat.
// Degenerate splits (a split missing both classes, or fewer fine-tune
// anomalies than shots) are resampled with the next derived seed.
PreparedData prepare_repeat(const ExperimentConfig& cfg, int repeat);

struct VariantOutcome {
  MetricsReport metrics;
  std::vector<double> test_scores;
  double runtime_seconds = 0.0;
};

// variant: gdn_minus | gdn | meta_gdn | random. When train_log is given,
// per-epoch loss lines are written to it.
VariantOutcome run_variant(const std::string& variant,
                           const PreparedData& data,
                           const ExperimentConfig& cfg,
                           std::ostream* train_log = nullptr);

// Setting names run_experiment would execute for this config.
std::vector<std::string> planned_settings(const ExperimentConfig& cfg);

// Runs the configured study, writes results.json, scores.csv (final
// setting, first repeat), and train_log.txt into output_dir, and returns
// the results JSON text.
std::string run_experiment(const ExperimentConfig& cfg);

// AUC versus contamination level for gdn and meta_gdn; unreachable levels
// are skipped with a warning row.
std::string run_contamination_study(const ExperimentConfig& cfg,
                                    const std::vector<double>& levels);

}  // namespace gdn
