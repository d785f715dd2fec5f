#include "gdn/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace gdn {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{})
    throw std::runtime_error("failed to format real value");
  return {buf, ptr};
}

void check_experiment_config(const ExperimentConfig& cfg) {
  if (cfg.repeats < 1)
    throw std::invalid_argument("config: repeats must be >= 1");
  if (cfg.shots < 1) throw std::invalid_argument("config: shots must be >= 1");
  if (cfg.degree_k < 0)
    throw std::invalid_argument("config: propagation degree must be >= 0");
  if (cfg.aux_bundles.empty()) {
    if (cfg.num_networks < 2)
      throw std::invalid_argument(
          "config: synthetic mode needs num_networks >= 2");
  } else if (cfg.target_bundle.empty()) {
    throw std::invalid_argument("config: aux bundles given without a target");
  }
  if (!cfg.inject && cfg.aux_bundles.empty())
    throw std::invalid_argument(
        "config: synthetic networks carry no labels; injection required");
}

struct NetworkData {
  AttributedGraph graph;
  std::vector<NodeId> truth;
  std::string name;
};

NetworkData prepare_network(const ExperimentConfig& cfg,
                            std::uint64_t run_seed, int index,
                            const std::string& bundle_path) {
  NetworkData net;
  if (bundle_path.empty()) {
    SynthSpec s = cfg.synth;
    s.name += "_" + std::to_string(index);
    Rng gen(derive_seed(run_seed, kSynthStream, index));
    net.graph = generate_synthetic(s, gen);
    net.name = s.name;
  } else {
    Bundle b = load_bundle(bundle_path);
    net.graph = std::move(b.graph);
    net.truth = anomaly_ids(b.anomalies);
    net.name = b.name.empty() ? bundle_path : b.name;
  }
  if (cfg.inject) {
    Rng inject_rng(derive_seed(run_seed, kInjectStream, index));
    InjectionReport report = inject_combined(net.graph, cfg.injection_rate,
                                             cfg.injection, inject_rng);
    net.graph = std::move(report.graph);
    net.truth.insert(net.truth.end(), report.structural_anomalies.begin(),
                     report.structural_anomalies.end());
    net.truth.insert(net.truth.end(), report.contextual_anomalies.begin(),
                     report.contextual_anomalies.end());
  }
  std::sort(net.truth.begin(), net.truth.end());
  net.truth.erase(std::unique(net.truth.begin(), net.truth.end()),
                  net.truth.end());
  return net;
}

Task make_fully_labeled_task(NetworkData&& net, int degree_k) {
  Task task;
  task.name = net.name;
  task.ground_truth = net.truth;
  task.labeled = net.truth;
  const std::unordered_set<NodeId> truth(net.truth.begin(), net.truth.end());
  for (NodeId v = 0; v < net.graph.num_nodes(); ++v)
    if (!truth.count(v)) task.unlabeled.push_back(v);
  const NormalizedAdjacency s = normalize_adjacency(net.graph);
  task.propagated = propagate(s, net.graph.features(), degree_k);
  task.graph = std::move(net.graph);
  validate_task(task);
  return task;
}

std::size_t count_members(const std::vector<NodeId>& nodes,
                          const std::unordered_set<NodeId>& set) {
  std::size_t c = 0;
  for (NodeId v : nodes) c += set.count(v) ? 1 : 0;
  return c;
}

}  // namespace

ExperimentConfig default_config() { return {}; }

std::string config_to_json(const ExperimentConfig& cfg) {
  const json j{
      {"aux_bundles", cfg.aux_bundles},
      {"target_bundle", cfg.target_bundle},
      {"synth",
       {{"n", cfg.synth.n},
        {"d", cfg.synth.d},
        {"blocks", cfg.synth.blocks},
        {"intra_p", cfg.synth.intra_p},
        {"inter_p", cfg.synth.inter_p},
        {"feature_shift", cfg.synth.feature_shift},
        {"name", cfg.synth.name}}},
      {"num_networks", cfg.num_networks},
      {"meta",
       {{"inner_lr", cfg.meta.inner_lr},
        {"meta_lr", cfg.meta.meta_lr},
        {"inner_steps", cfg.meta.inner_steps},
        {"epochs", cfg.meta.epochs},
        {"batch_size", cfg.meta.batch_size},
        {"fine_tune_epochs", cfg.meta.fine_tune_epochs},
        {"encoder_dim", cfg.meta.encoder_dim},
        {"hidden_dim", cfg.meta.hidden_dim},
        {"margin", cfg.meta.loss.margin},
        {"prior_mean", cfg.meta.loss.prior_mean},
        {"prior_std", cfg.meta.loss.prior_std},
        {"sample_count", cfg.meta.loss.sample_count}}},
      {"injection",
       {{"clique_size", cfg.injection.clique_size},
        {"candidate_pool", cfg.injection.candidate_pool}}},
      {"injection_rate", cfg.injection_rate},
      {"inject", cfg.inject},
      {"degree_k", cfg.degree_k},
      {"split",
       {{"fine_tune_fraction", cfg.split.fine_tune_fraction},
        {"validation_fraction", cfg.split.validation_fraction},
        {"test_fraction", cfg.split.test_fraction}}},
      {"shots", cfg.shots},
      {"metric_ks", cfg.metric_ks},
      {"contamination_levels", cfg.contamination_levels},
      {"output_dir", cfg.output_dir},
      {"seed", cfg.seed},
      {"repeats", cfg.repeats},
      {"mode", cfg.mode}};
  return j.dump(2);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }

  ExperimentConfig cfg;
  cfg.aux_bundles =
      j.value("aux_bundles", std::vector<std::string>{});
  cfg.target_bundle = j.value("target_bundle", cfg.target_bundle);
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    cfg.synth.n = s.value("n", cfg.synth.n);
    cfg.synth.d = s.value("d", cfg.synth.d);
    cfg.synth.blocks = s.value("blocks", cfg.synth.blocks);
    cfg.synth.intra_p = s.value("intra_p", cfg.synth.intra_p);
    cfg.synth.inter_p = s.value("inter_p", cfg.synth.inter_p);
    cfg.synth.feature_shift = s.value("feature_shift", cfg.synth.feature_shift);
    cfg.synth.name = s.value("name", cfg.synth.name);
  }
  cfg.num_networks = j.value("num_networks", cfg.num_networks);
  if (j.contains("meta")) {
    const json& m = j.at("meta");
    cfg.meta.inner_lr = m.value("inner_lr", cfg.meta.inner_lr);
    cfg.meta.meta_lr = m.value("meta_lr", cfg.meta.meta_lr);
    cfg.meta.inner_steps = m.value("inner_steps", cfg.meta.inner_steps);
    cfg.meta.epochs = m.value("epochs", cfg.meta.epochs);
    cfg.meta.batch_size = m.value("batch_size", cfg.meta.batch_size);
    cfg.meta.fine_tune_epochs =
        m.value("fine_tune_epochs", cfg.meta.fine_tune_epochs);
    cfg.meta.encoder_dim = m.value("encoder_dim", cfg.meta.encoder_dim);
    cfg.meta.hidden_dim = m.value("hidden_dim", cfg.meta.hidden_dim);
    cfg.meta.loss.margin = m.value("margin", cfg.meta.loss.margin);
    cfg.meta.loss.prior_mean = m.value("prior_mean", cfg.meta.loss.prior_mean);
    cfg.meta.loss.prior_std = m.value("prior_std", cfg.meta.loss.prior_std);
    cfg.meta.loss.sample_count =
        m.value("sample_count", cfg.meta.loss.sample_count);
  }
  if (j.contains("injection")) {
    const json& i = j.at("injection");
    cfg.injection.clique_size =
        i.value("clique_size", cfg.injection.clique_size);
    cfg.injection.candidate_pool =
        i.value("candidate_pool", cfg.injection.candidate_pool);
  }
  cfg.injection_rate = j.value("injection_rate", cfg.injection_rate);
  cfg.inject = j.value("inject", cfg.inject);
  cfg.degree_k = j.value("degree_k", cfg.degree_k);
  if (j.contains("split")) {
    const json& s = j.at("split");
    cfg.split.fine_tune_fraction =
        s.value("fine_tune_fraction", cfg.split.fine_tune_fraction);
    cfg.split.validation_fraction =
        s.value("validation_fraction", cfg.split.validation_fraction);
    cfg.split.test_fraction =
        s.value("test_fraction", cfg.split.test_fraction);
  }
  cfg.shots = j.value("shots", cfg.shots);
  cfg.metric_ks = j.value("metric_ks", cfg.metric_ks);
  cfg.contamination_levels =
      j.value("contamination_levels", cfg.contamination_levels);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.repeats = j.value("repeats", cfg.repeats);
  cfg.mode = j.value("mode", cfg.mode);
  return cfg;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string text = config_to_json(cfg);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

PreparedData prepare_repeat(const ExperimentConfig& cfg, int repeat) {
  check_experiment_config(cfg);
  PreparedData out;
  out.run_seed = derive_seed(cfg.seed, kRunStream, repeat);

  const bool synthetic = cfg.aux_bundles.empty();
  const int total = synthetic
                        ? cfg.num_networks
                        : static_cast<int>(cfg.aux_bundles.size()) + 1;
  NetworkData target_net;
  for (int i = 0; i < total; ++i) {
    const bool is_target = i == total - 1;
    std::string path;
    if (!synthetic)
      path = is_target ? cfg.target_bundle
                       : cfg.aux_bundles[static_cast<std::size_t>(i)];
    NetworkData net = prepare_network(cfg, out.run_seed, i, path);
    if (is_target)
      target_net = std::move(net);
    else
      out.aux_tasks.push_back(
          make_fully_labeled_task(std::move(net), cfg.degree_k));
  }

  const std::unordered_set<NodeId> truth(target_net.truth.begin(),
                                         target_net.truth.end());
  out.target_anomaly_count = target_net.truth.size();
  std::vector<NodeId> all_nodes(
      static_cast<std::size_t>(target_net.graph.num_nodes()));
  std::iota(all_nodes.begin(), all_nodes.end(), NodeId{0});

  TargetSplit split;
  std::vector<NodeId> fine_tune_anomalies;
  bool ok = false;
  constexpr int kMaxSplitAttempts = 100;
  for (int attempt = 0; attempt < kMaxSplitAttempts; ++attempt) {
    Rng split_rng(derive_seed(out.run_seed, kSplitStream, attempt));
    split = split_target(all_nodes, cfg.split, split_rng);
    fine_tune_anomalies.clear();
    for (NodeId v : split.fine_tune)
      if (truth.count(v)) fine_tune_anomalies.push_back(v);
    out.fine_tune_anomaly_count = fine_tune_anomalies.size();
    out.validation_anomaly_count = count_members(split.validation, truth);
    out.test_anomaly_count = count_members(split.test, truth);
    out.split_attempts = attempt + 1;
    const bool val_two_class =
        out.validation_anomaly_count > 0 &&
        out.validation_anomaly_count < split.validation.size();
    const bool test_two_class = out.test_anomaly_count > 0 &&
                                out.test_anomaly_count < split.test.size();
    if (val_two_class && test_two_class &&
        fine_tune_anomalies.size() >= static_cast<std::size_t>(cfg.shots)) {
      ok = true;
      break;
    }
    std::cerr << "warning: degenerate split draw (attempt " << attempt + 1
              << ") for repeat " << repeat << "; resampling\n";
  }
  if (!ok)
    throw std::runtime_error("could not draw a usable split after " +
                             std::to_string(kMaxSplitAttempts) + " attempts");

  Rng shot_rng(derive_seed(out.run_seed, kShotStream));
  std::sort(fine_tune_anomalies.begin(), fine_tune_anomalies.end());
  const std::vector<NodeId> labeled =
      select_shots(fine_tune_anomalies, cfg.shots, shot_rng);
  const std::unordered_set<NodeId> labeled_set(labeled.begin(), labeled.end());

  Task task;
  task.name = target_net.name;
  task.ground_truth = target_net.truth;
  task.labeled = labeled;
  for (NodeId v : split.fine_tune)
    if (!labeled_set.count(v)) task.unlabeled.push_back(v);
  const NormalizedAdjacency s = normalize_adjacency(target_net.graph);
  task.propagated = propagate(s, target_net.graph.features(), cfg.degree_k);
  task.graph = std::move(target_net.graph);
  validate_task(task);
  out.target_task = std::move(task);

  out.validation.indices = split.validation;
  for (NodeId v : split.validation)
    out.validation.labels.push_back(truth.count(v) ? 1 : 0);
  out.test_nodes = split.test;
  for (NodeId v : split.test)
    out.test_labels.push_back(truth.count(v) ? 1 : 0);
  return out;
}

VariantOutcome run_variant(const std::string& variant,
                           const PreparedData& data,
                           const ExperimentConfig& cfg,
                           std::ostream* train_log) {
  const auto start = std::chrono::steady_clock::now();
  MetaConfig mc = cfg.meta;
  mc.seed = data.run_seed;
  mc.num_aux = static_cast<int>(data.aux_tasks.size());

  EpochCallback log;
  if (train_log)
    log = [train_log](int epoch, const std::vector<double>& task_losses,
                      double mean_loss) {
      *train_log << "epoch " << epoch << " mean_loss "
                 << format_real(mean_loss);
      if (task_losses.size() > 1) {
        *train_log << " task_losses";
        for (double v : task_losses) *train_log << ' ' << format_real(v);
      }
      *train_log << '\n';
    };

  VariantOutcome out;
  if (variant == "random") {
    Rng rng(derive_seed(data.run_seed, kBaselineStream));
    out.metrics = random_baseline(data.test_labels, rng, 10, cfg.metric_ks);
    out.test_scores.resize(data.test_nodes.size());
    for (double& s : out.test_scores) s = rng.uniform();
  } else {
    GdnParams params;
    PropagatedFeatures scoring_feats;
    if (variant == "meta_gdn") {
      params = train_meta(data.aux_tasks, mc, log);
      if (train_log) *train_log << "fine-tuning\n";
      params = fine_tune(params, data.target_task, mc, &data.validation, log);
      scoring_feats = data.target_task.propagated;
    } else if (variant == "gdn") {
      params = train_single(data.target_task, mc, log);
      scoring_feats = data.target_task.propagated;
    } else if (variant == "gdn_minus") {
      // Encoder ablation: raw features, no propagation; the architecture
      // is untouched.
      Task raw = data.target_task;
      raw.propagated = PropagatedFeatures{raw.graph.features(), 0};
      params = train_single(raw, mc, log);
      scoring_feats = raw.propagated;
    } else {
      throw std::invalid_argument("unknown variant '" + variant + "'");
    }
    const ScoreBatch scored =
        score_nodes(params, scoring_feats, data.test_nodes);
    out.test_scores = scored.scores;
    out.metrics = compute_metrics(
        {data.test_nodes, scored.scores, data.test_labels}, cfg.metric_ks);
  }
  out.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

namespace {

struct SettingSpec {
  std::string name;
  std::string variant;
  ExperimentConfig cfg;
  int aux_limit = 0;      // >0: truncate auxiliary task list
  double r_c = -1.0;      // >=0: contamination level to apply
};

std::vector<SettingSpec> build_settings(const ExperimentConfig& cfg) {
  std::vector<SettingSpec> out;
  if (cfg.mode == "overall") {
    out.push_back({"random", "random", cfg, 0, -1.0});
    out.push_back({"gdn", "gdn", cfg, 0, -1.0});
    out.push_back({"meta_gdn", "meta_gdn", cfg, 0, -1.0});
  } else if (cfg.mode == "ablation") {
    out.push_back({"gdn_minus", "gdn_minus", cfg, 0, -1.0});
    out.push_back({"gdn", "gdn", cfg, 0, -1.0});
    out.push_back({"meta_gdn", "meta_gdn", cfg, 0, -1.0});
  } else if (cfg.mode == "shots_sweep") {
    const std::pair<int, int> grid[] = {{1, 2}, {3, 4}, {5, 8}, {10, 16}};
    for (const auto& [shots, batch] : grid) {
      SettingSpec s{"meta_gdn_shot" + std::to_string(shots), "meta_gdn", cfg,
                    0, -1.0};
      s.cfg.shots = shots;
      s.cfg.meta.batch_size = batch;
      out.push_back(std::move(s));
    }
  } else if (cfg.mode == "aux_sweep") {
    const int max_p = cfg.aux_bundles.empty()
                          ? cfg.num_networks - 1
                          : static_cast<int>(cfg.aux_bundles.size());
    for (int p = 1; p <= max_p; ++p)
      out.push_back(
          {"meta_gdn_aux" + std::to_string(p), "meta_gdn", cfg, p, -1.0});
  } else {
    throw std::invalid_argument("unknown mode '" + cfg.mode + "'");
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void write_scores_csv(const fs::path& path, const std::vector<NodeId>& nodes,
                      const std::vector<double>& scores) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "node_id,score\n";
  for (std::size_t i = 0; i < nodes.size(); ++i)
    out << nodes[i] << ',' << format_real(scores[i]) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// Shared runner for run_experiment and run_contamination_study.
std::string run_settings(const ExperimentConfig& cfg,
                         std::vector<SettingSpec> settings) {
  check_experiment_config(cfg);
  fs::create_directories(cfg.output_dir);
  const std::string hash = hash_hex(config_hash(cfg));

  json rows = json::array();
  for (std::size_t si = 0; si < settings.size(); ++si) {
    const SettingSpec& spec = settings[si];
    std::vector<double> aucs, prs, runtimes;
    std::map<std::size_t, std::vector<double>> precs;
    json runs = json::array();
    bool skipped = false;
    std::string skip_reason;

    for (int r = 0; r < cfg.repeats && !skipped; ++r) {
      PreparedData data;
      try {
        data = prepare_repeat(spec.cfg, r);
      } catch (const std::exception& e) {
        throw std::runtime_error("[prepare] setting " + spec.name +
                                 " repeat " + std::to_string(r) + ": " +
                                 e.what());
      }
      if (spec.aux_limit > 0 &&
          static_cast<std::size_t>(spec.aux_limit) < data.aux_tasks.size())
        data.aux_tasks.resize(static_cast<std::size_t>(spec.aux_limit));
      if (spec.r_c >= 0.0) {
        Rng crng(derive_seed(data.run_seed, kContaminationStream));
        try {
          data.target_task =
              set_contamination(data.target_task, spec.r_c, crng);
        } catch (const std::invalid_argument& e) {
          skipped = true;
          skip_reason = e.what();
          std::cerr << "warning: skipping " << spec.name << ": " << e.what()
                    << "\n";
          break;
        }
      }

      VariantOutcome outcome;
      std::ofstream log_file;
      if (si + 1 == settings.size() && r == 0) {
        log_file.open(fs::path(cfg.output_dir) / "train_log.txt");
        log_file << "setting " << spec.name << " repeat 0\n";
      }
      try {
        outcome = run_variant(spec.variant, data, spec.cfg,
                              log_file.is_open() ? &log_file : nullptr);
      } catch (const std::exception& e) {
        throw std::runtime_error("[train/score] setting " + spec.name +
                                 " repeat " + std::to_string(r) + ": " +
                                 e.what());
      }
      aucs.push_back(outcome.metrics.auc_roc);
      prs.push_back(outcome.metrics.auc_pr);
      runtimes.push_back(outcome.runtime_seconds);
      for (const auto& [k, v] : outcome.metrics.precision_at_k)
        precs[k].push_back(v);
      runs.push_back({{"repeat", r},
                      {"run_seed", data.run_seed},
                      {"split_attempts", data.split_attempts},
                      {"target_anomalies", data.target_anomaly_count},
                      {"fine_tune_anomalies", data.fine_tune_anomaly_count},
                      {"validation_anomalies", data.validation_anomaly_count},
                      {"test_anomalies", data.test_anomaly_count},
                      {"auc_roc", outcome.metrics.auc_roc},
                      {"auc_pr", outcome.metrics.auc_pr}});

      if (si + 1 == settings.size() && r == 0)
        write_scores_csv(fs::path(cfg.output_dir) / "scores.csv",
                         data.test_nodes, outcome.test_scores);
    }

    json row{{"config_hash", hash},
             {"seed", cfg.seed},
             {"setting", spec.name}};
    if (spec.r_c >= 0.0) row["r_c"] = spec.r_c;
    if (skipped) {
      row["skipped"] = true;
      row["reason"] = skip_reason;
    } else {
      json prec_json = json::object();
      for (const auto& [k, v] : precs)
        prec_json[std::to_string(k)] = mean_of(v);
      row["auc_roc_mean"] = mean_of(aucs);
      row["auc_roc_std"] = std_of(aucs);
      row["auc_pr_mean"] = mean_of(prs);
      row["auc_pr_std"] = std_of(prs);
      row["precision_at_k"] = prec_json;
      double total_runtime = 0.0;
      for (double t : runtimes) total_runtime += t;
      row["runtime_seconds"] = total_runtime;
      row["runs"] = runs;
    }
    rows.push_back(std::move(row));
  }

  const json results{{"config_hash", hash},
                     {"seed", cfg.seed},
                     {"mode", cfg.mode},
                     {"results", rows}};
  const std::string text = results.dump(2);
  std::ofstream out(fs::path(cfg.output_dir) / "results.json");
  if (!out)
    throw std::runtime_error("[write] cannot write results.json in " +
                             cfg.output_dir);
  out << text << "\n";
  return text;
}

}  // namespace

std::vector<std::string> planned_settings(const ExperimentConfig& cfg) {
  std::vector<std::string> names;
  for (const SettingSpec& s : build_settings(cfg)) names.push_back(s.name);
  return names;
}

std::string run_experiment(const ExperimentConfig& cfg) {
  return run_settings(cfg, build_settings(cfg));
}

std::string run_contamination_study(const ExperimentConfig& cfg,
                                    const std::vector<double>& levels) {
  std::vector<SettingSpec> settings;
  for (double level : levels)
    for (const char* variant : {"gdn", "meta_gdn"}) {
      SettingSpec s{std::string(variant) + "_rc" + format_real(level), variant,
                    cfg, 0, level};
      settings.push_back(std::move(s));
    }
  return run_settings(cfg, settings);
}

}  // namespace gdn
