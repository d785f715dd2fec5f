// Command-line front end: benchmark construction, training, scoring, and
// the experiment/contamination studies.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gdn/data_io.hpp"
#include "gdn/deviation.hpp"
#include "gdn/experiment.hpp"
#include "gdn/injection.hpp"
#include "gdn/metrics.hpp"
#include "gdn/model.hpp"
#include "gdn/trainer.hpp"

namespace {

using nlohmann::json;

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("failed to format value");
  return {buf, ptr};
}

// Full-label task: every ground-truth anomaly is in the labeled pool.
gdn::Task bundle_task(gdn::Bundle&& bundle, int degree_k) {
  gdn::Task task;
  task.name = bundle.name;
  task.ground_truth = gdn::anomaly_ids(bundle.anomalies);
  std::sort(task.ground_truth.begin(), task.ground_truth.end());
  task.ground_truth.erase(
      std::unique(task.ground_truth.begin(), task.ground_truth.end()),
      task.ground_truth.end());
  task.labeled = task.ground_truth;
  const std::unordered_set<gdn::NodeId> truth(task.ground_truth.begin(),
                                              task.ground_truth.end());
  for (gdn::NodeId v = 0; v < bundle.graph.num_nodes(); ++v)
    if (!truth.count(v)) task.unlabeled.push_back(v);
  const gdn::NormalizedAdjacency s = gdn::normalize_adjacency(bundle.graph);
  task.propagated = gdn::propagate(s, bundle.graph.features(), degree_k);
  task.graph = std::move(bundle.graph);
  gdn::validate_task(task);
  return task;
}

gdn::EpochCallback file_logger(std::ofstream& out) {
  return [&out](int epoch, const std::vector<double>& task_losses,
                double mean_loss) {
    out << "epoch " << epoch << " mean_loss " << format_real(mean_loss);
    if (task_losses.size() > 1) {
      out << " task_losses";
      for (double v : task_losses) out << ' ' << format_real(v);
    }
    out << '\n';
  };
}

// Shared hyperparameter flags for the training subcommands.
struct TrainFlags {
  gdn::MetaConfig meta;
  int degree_k = 2;
  std::uint64_t seed = 0;
  std::string log_path;
  int checkpoint_every = 0;

  void add_common(CLI::App* cmd) {
    cmd->add_option("--epochs", meta.epochs, "training epochs");
    cmd->add_option("--batch", meta.batch_size, "batch size (even)");
    cmd->add_option("--inner-lr", meta.inner_lr, "gradient step rate");
    cmd->add_option("--encoder-dim", meta.encoder_dim, "encoder width");
    cmd->add_option("--hidden-dim", meta.hidden_dim, "valuator hidden width");
    cmd->add_option("--margin", meta.loss.margin, "deviation margin");
    cmd->add_option("--prior-mean", meta.loss.prior_mean, "reference mean");
    cmd->add_option("--prior-std", meta.loss.prior_std, "reference std");
    cmd->add_option("--reference-samples", meta.loss.sample_count,
                    "reference sample count");
    cmd->add_option("--degree-k", degree_k, "propagation steps");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--log", log_path, "write per-epoch loss lines here");
    cmd->add_option("--checkpoint-every", checkpoint_every,
                    "also save the checkpoint every N epochs");
  }
};

gdn::SnapshotCallback interval_snapshots(int every, const std::string& out,
                                         int degree_k) {
  if (every <= 0) return nullptr;
  return [every, out, degree_k](int epoch, const gdn::GdnParams& p) {
    if ((epoch + 1) % every == 0)
      gdn::save_checkpoint(p, degree_k,
                           out + ".epoch" + std::to_string(epoch + 1));
  };
}

void print_results_summary(const std::string& results_text) {
  const json j = json::parse(results_text);
  for (const json& row : j.at("results")) {
    std::cout << row.at("setting").get<std::string>();
    if (row.value("skipped", false)) {
      std::cout << ": skipped (" << row.value("reason", std::string{})
                << ")\n";
      continue;
    }
    std::cout << ": auc_roc " << row.at("auc_roc_mean").get<double>() << " +- "
              << row.at("auc_roc_std").get<double>() << ", auc_pr "
              << row.at("auc_pr_mean").get<double>() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot node anomaly detection on attributed networks"};
  app.require_subcommand(1);

  // synth
  auto synth_spec = std::make_shared<gdn::SynthSpec>();
  auto synth_out = std::make_shared<std::string>();
  {
    CLI::App* cmd = app.add_subcommand("synth",
                                       "generate a synthetic network bundle");
    cmd->add_option("--out", *synth_out, "bundle directory")->required();
    cmd->add_option("--n", synth_spec->n, "node count");
    cmd->add_option("--d", synth_spec->d, "feature dimension");
    cmd->add_option("--blocks", synth_spec->blocks, "block count");
    cmd->add_option("--intra-p", synth_spec->intra_p,
                    "within-block edge probability");
    cmd->add_option("--inter-p", synth_spec->inter_p,
                    "cross-block edge probability");
    cmd->add_option("--feature-shift", synth_spec->feature_shift,
                    "block mean separation");
    cmd->add_option("--seed", synth_spec->seed, "generator seed");
    cmd->add_option("--name", synth_spec->name, "network name");
    cmd->callback([=]() {
      gdn::Rng rng(synth_spec->seed);
      gdn::Bundle bundle;
      bundle.graph = gdn::generate_synthetic(*synth_spec, rng);
      bundle.name = synth_spec->name;
      gdn::save_bundle(bundle, *synth_out);
      std::cout << "wrote " << *synth_out << " (" << bundle.graph.num_nodes()
                << " nodes, " << bundle.graph.num_edges() << " edges)\n";
    });
  }

  // inject
  struct InjectOpts {
    std::string in, out;
    double rate = 0.05;
    int cliques = -1;
    int contextual = -1;
    gdn::InjectionSpec spec;
  };
  auto inject_opts = std::make_shared<InjectOpts>();
  {
    CLI::App* cmd =
        app.add_subcommand("inject", "plant labeled anomalies in a bundle");
    cmd->add_option("--in", inject_opts->in, "input bundle")->required();
    cmd->add_option("--out", inject_opts->out, "output bundle")->required();
    cmd->add_option("--rate", inject_opts->rate,
                    "total anomaly fraction (combined mode)");
    cmd->add_option("--cliques", inject_opts->cliques,
                    "explicit clique count (overrides --rate)");
    cmd->add_option("--contextual", inject_opts->contextual,
                    "explicit contextual count (overrides --rate)");
    cmd->add_option("--clique-size", inject_opts->spec.clique_size,
                    "nodes per clique");
    cmd->add_option("--pool", inject_opts->spec.candidate_pool,
                    "contextual candidate pool size");
    cmd->add_option("--seed", inject_opts->spec.seed, "injection seed");
    cmd->callback([=]() {
      gdn::Bundle bundle = gdn::load_bundle(inject_opts->in);
      gdn::Rng rng(inject_opts->spec.seed);
      std::vector<gdn::NodeId> structural, contextual;
      if (inject_opts->cliques >= 0 || inject_opts->contextual >= 0) {
        gdn::AttributedGraph g = std::move(bundle.graph);
        if (inject_opts->cliques > 0) {
          auto [g2, nodes] = gdn::inject_structural(
              g, inject_opts->cliques, inject_opts->spec.clique_size, rng);
          g = std::move(g2);
          structural = std::move(nodes);
        }
        if (inject_opts->contextual > 0) {
          auto [g2, nodes] = gdn::inject_contextual(
              g, inject_opts->contextual, inject_opts->spec.candidate_pool,
              rng, structural);
          g = std::move(g2);
          contextual = std::move(nodes);
        }
        bundle.graph = std::move(g);
      } else {
        gdn::InjectionReport report = gdn::inject_combined(
            bundle.graph, inject_opts->rate, inject_opts->spec, rng);
        bundle.graph = std::move(report.graph);
        structural = std::move(report.structural_anomalies);
        contextual = std::move(report.contextual_anomalies);
      }
      for (gdn::NodeId v : structural)
        bundle.anomalies.push_back({v, gdn::AnomalyType::kStructural});
      for (gdn::NodeId v : contextual)
        bundle.anomalies.push_back({v, gdn::AnomalyType::kContextual});
      std::sort(bundle.anomalies.begin(), bundle.anomalies.end(),
                [](const auto& a, const auto& b) { return a.node < b.node; });
      gdn::save_bundle(bundle, inject_opts->out);
      std::cout << "wrote " << inject_opts->out << " (" << structural.size()
                << " structural + " << contextual.size()
                << " contextual anomalies)\n";
    });
  }

  // partition
  struct PartitionOpts {
    std::string in, out;
    int parts = 5;
    std::uint64_t seed = 0;
  };
  auto part_opts = std::make_shared<PartitionOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "partition", "split a network into same-size sub-networks");
    cmd->add_option("--in", part_opts->in, "input bundle")->required();
    cmd->add_option("--out", part_opts->out, "output directory")->required();
    cmd->add_option("--parts", part_opts->parts, "number of sub-networks");
    cmd->add_option("--seed", part_opts->seed, "assignment seed");
    cmd->callback([=]() {
      gdn::Bundle bundle = gdn::load_bundle(part_opts->in);
      std::map<gdn::NodeId, gdn::AnomalyType> truth;
      for (const auto& a : bundle.anomalies) truth[a.node] = a.type;
      gdn::Rng rng(part_opts->seed);
      std::vector<gdn::AttributedGraph> parts =
          gdn::partition_network(bundle.graph, part_opts->parts, rng);
      for (std::size_t i = 0; i < parts.size(); ++i) {
        gdn::Bundle sub;
        sub.name = bundle.name + "_part" + std::to_string(i);
        const auto& ext = parts[i].external_ids();
        for (std::size_t local = 0; local < ext.size(); ++local) {
          const auto it = truth.find(ext[local]);
          if (it != truth.end())
            sub.anomalies.push_back(
                {static_cast<gdn::NodeId>(local), it->second});
        }
        sub.graph = std::move(parts[i]);
        const std::string dir =
            part_opts->out + "/part_" + std::to_string(i);
        gdn::save_bundle(sub, dir);
        std::cout << "wrote " << dir << " (" << sub.graph.num_nodes()
                  << " nodes, " << sub.anomalies.size() << " anomalies)\n";
      }
    });
  }

  // split
  struct SplitOpts {
    std::string in, out;
    gdn::SplitSpec spec;
  };
  auto split_opts = std::make_shared<SplitOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "split", "draw the fine-tune/validation/test node split");
    cmd->add_option("--in", split_opts->in, "input bundle")->required();
    cmd->add_option("--out", split_opts->out, "output JSON file")->required();
    cmd->add_option("--fine-tune-fraction",
                    split_opts->spec.fine_tune_fraction, "fine-tune share");
    cmd->add_option("--validation-fraction",
                    split_opts->spec.validation_fraction, "validation share");
    cmd->add_option("--test-fraction", split_opts->spec.test_fraction,
                    "test share");
    cmd->add_option("--seed", split_opts->spec.seed, "shuffle seed");
    cmd->callback([=]() {
      const gdn::Bundle bundle = gdn::load_bundle(split_opts->in);
      std::vector<gdn::NodeId> nodes(
          static_cast<std::size_t>(bundle.graph.num_nodes()));
      std::iota(nodes.begin(), nodes.end(), gdn::NodeId{0});
      gdn::Rng rng(split_opts->spec.seed);
      const gdn::TargetSplit split =
          gdn::split_target(nodes, split_opts->spec, rng);
      const json j{{"fine_tune", split.fine_tune},
                   {"validation", split.validation},
                   {"test", split.test}};
      std::ofstream out(split_opts->out);
      if (!out)
        throw std::runtime_error("cannot write " + split_opts->out);
      out << j.dump(2) << "\n";
      std::cout << "wrote " << split_opts->out << " (sizes "
                << split.fine_tune.size() << "/" << split.validation.size()
                << "/" << split.test.size() << ")\n";
    });
  }

  // train
  struct TrainOpts {
    std::string in, out;
    TrainFlags flags;
  };
  auto train_opts = std::make_shared<TrainOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "train", "train a detector on one fully labeled network");
    cmd->add_option("--in", train_opts->in, "training bundle")->required();
    cmd->add_option("--out", train_opts->out, "checkpoint path")->required();
    train_opts->flags.add_common(cmd);
    cmd->callback([=]() {
      gdn::MetaConfig cfg = train_opts->flags.meta;
      cfg.seed = train_opts->flags.seed;
      const gdn::Task task = bundle_task(gdn::load_bundle(train_opts->in),
                                         train_opts->flags.degree_k);
      std::ofstream log_file;
      gdn::EpochCallback log;
      if (!train_opts->flags.log_path.empty()) {
        log_file.open(train_opts->flags.log_path);
        log = file_logger(log_file);
      }
      const gdn::GdnParams params = gdn::train_single(
          task, cfg, log,
          interval_snapshots(train_opts->flags.checkpoint_every,
                             train_opts->out, train_opts->flags.degree_k));
      gdn::save_checkpoint(params, train_opts->flags.degree_k,
                           train_opts->out);
      std::cout << "wrote " << train_opts->out << "\n";
    });
  }

  // meta-train
  struct MetaTrainOpts {
    std::vector<std::string> aux;
    std::string out;
    TrainFlags flags;
  };
  auto meta_opts = std::make_shared<MetaTrainOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "meta-train", "meta-train an initialization across networks");
    cmd->add_option("--aux", meta_opts->aux, "auxiliary bundles")
        ->required()
        ->expected(-1);
    cmd->add_option("--out", meta_opts->out, "checkpoint path")->required();
    cmd->add_option("--meta-lr", meta_opts->flags.meta.meta_lr,
                    "meta update rate");
    cmd->add_option("--inner-steps", meta_opts->flags.meta.inner_steps,
                    "adaptation steps per task");
    meta_opts->flags.add_common(cmd);
    cmd->callback([=]() {
      gdn::MetaConfig cfg = meta_opts->flags.meta;
      cfg.seed = meta_opts->flags.seed;
      std::vector<gdn::Task> tasks;
      for (const std::string& path : meta_opts->aux)
        tasks.push_back(
            bundle_task(gdn::load_bundle(path), meta_opts->flags.degree_k));
      cfg.num_aux = static_cast<int>(tasks.size());
      std::ofstream log_file;
      gdn::EpochCallback log;
      if (!meta_opts->flags.log_path.empty()) {
        log_file.open(meta_opts->flags.log_path);
        log = file_logger(log_file);
      }
      const gdn::GdnParams params = gdn::train_meta(
          tasks, cfg, log,
          interval_snapshots(meta_opts->flags.checkpoint_every, meta_opts->out,
                             meta_opts->flags.degree_k));
      gdn::save_checkpoint(params, meta_opts->flags.degree_k, meta_opts->out);
      std::cout << "wrote " << meta_opts->out << "\n";
    });
  }

  // fine-tune
  struct FineTuneOpts {
    std::string checkpoint, in, out;
    int shots = 10;
    gdn::SplitSpec split;
    TrainFlags flags;
  };
  auto ft_opts = std::make_shared<FineTuneOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "fine-tune", "adapt a checkpoint to a few-shot target network");
    cmd->add_option("--checkpoint", ft_opts->checkpoint, "starting checkpoint")
        ->required();
    cmd->add_option("--in", ft_opts->in, "target bundle")->required();
    cmd->add_option("--out", ft_opts->out, "adapted checkpoint path")
        ->required();
    cmd->add_option("--shots", ft_opts->shots, "labeled anomaly budget");
    cmd->add_option("--fine-tune-epochs",
                    ft_opts->flags.meta.fine_tune_epochs, "fine-tune epochs");
    cmd->add_option("--fine-tune-fraction",
                    ft_opts->split.fine_tune_fraction, "fine-tune share");
    cmd->add_option("--validation-fraction",
                    ft_opts->split.validation_fraction, "validation share");
    cmd->add_option("--test-fraction", ft_opts->split.test_fraction,
                    "test share");
    ft_opts->flags.add_common(cmd);
    cmd->callback([=]() {
      auto [params, degree_k] = gdn::load_checkpoint(ft_opts->checkpoint);
      gdn::MetaConfig cfg = ft_opts->flags.meta;
      cfg.seed = ft_opts->flags.seed;
      gdn::Bundle bundle = gdn::load_bundle(ft_opts->in);

      std::vector<gdn::NodeId> nodes(
          static_cast<std::size_t>(bundle.graph.num_nodes()));
      std::iota(nodes.begin(), nodes.end(), gdn::NodeId{0});
      gdn::Rng split_rng(
          gdn::derive_seed(cfg.seed, gdn::kSplitStream, 0));
      const gdn::TargetSplit split =
          gdn::split_target(nodes, ft_opts->split, split_rng);

      std::vector<gdn::NodeId> truth = gdn::anomaly_ids(bundle.anomalies);
      std::sort(truth.begin(), truth.end());
      const std::unordered_set<gdn::NodeId> truth_set(truth.begin(),
                                                      truth.end());
      std::vector<gdn::NodeId> ft_anomalies;
      for (gdn::NodeId v : split.fine_tune)
        if (truth_set.count(v)) ft_anomalies.push_back(v);
      std::sort(ft_anomalies.begin(), ft_anomalies.end());
      gdn::Rng shot_rng(gdn::derive_seed(cfg.seed, gdn::kShotStream));
      const std::vector<gdn::NodeId> labeled =
          gdn::select_shots(ft_anomalies, ft_opts->shots, shot_rng);
      const std::unordered_set<gdn::NodeId> labeled_set(labeled.begin(),
                                                        labeled.end());

      gdn::Task task;
      task.name = bundle.name;
      task.ground_truth = truth;
      task.labeled = labeled;
      for (gdn::NodeId v : split.fine_tune)
        if (!labeled_set.count(v)) task.unlabeled.push_back(v);
      const gdn::NormalizedAdjacency s =
          gdn::normalize_adjacency(bundle.graph);
      task.propagated = gdn::propagate(s, bundle.graph.features(), degree_k);
      task.graph = std::move(bundle.graph);
      gdn::validate_task(task);

      gdn::ValidationSet validation;
      validation.indices = split.validation;
      for (gdn::NodeId v : split.validation)
        validation.labels.push_back(truth_set.count(v) ? 1 : 0);

      const gdn::GdnParams adapted =
          gdn::fine_tune(params, task, cfg, &validation);
      gdn::save_checkpoint(adapted, degree_k, ft_opts->out);
      std::cout << "wrote " << ft_opts->out << "\n";
    });
  }

  // score
  struct ScoreOpts {
    std::string checkpoint, in, out;
  };
  auto score_opts = std::make_shared<ScoreOpts>();
  {
    CLI::App* cmd =
        app.add_subcommand("score", "score every node of a bundle");
    cmd->add_option("--checkpoint", score_opts->checkpoint, "checkpoint path")
        ->required();
    cmd->add_option("--in", score_opts->in, "bundle to score")->required();
    cmd->add_option("--out", score_opts->out, "scores.csv path")->required();
    cmd->callback([=]() {
      auto [params, degree_k] = gdn::load_checkpoint(score_opts->checkpoint);
      const gdn::Bundle bundle = gdn::load_bundle(score_opts->in);
      const gdn::NormalizedAdjacency s =
          gdn::normalize_adjacency(bundle.graph);
      const gdn::PropagatedFeatures feats =
          gdn::propagate(s, bundle.graph.features(), degree_k);
      std::vector<gdn::NodeId> nodes(
          static_cast<std::size_t>(bundle.graph.num_nodes()));
      std::iota(nodes.begin(), nodes.end(), gdn::NodeId{0});
      const gdn::ScoreBatch scored = gdn::score_nodes(params, feats, nodes);
      std::ofstream out(score_opts->out);
      if (!out) throw std::runtime_error("cannot write " + score_opts->out);
      out << "node_id,score\n";
      for (std::size_t i = 0; i < nodes.size(); ++i)
        out << nodes[i] << ',' << format_real(scored.scores[i]) << '\n';
      std::cout << "wrote " << score_opts->out << " (" << nodes.size()
                << " nodes)\n";
    });
  }

  // eval
  struct EvalOpts {
    std::string scores, in, out;
    std::vector<std::size_t> ks = {25, 50, 100};
  };
  auto eval_opts = std::make_shared<EvalOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "eval", "ranking metrics for a scores file against bundle labels");
    cmd->add_option("--scores", eval_opts->scores, "scores.csv")->required();
    cmd->add_option("--in", eval_opts->in, "bundle with ground truth")
        ->required();
    cmd->add_option("--k", eval_opts->ks, "precision@K cutoffs");
    cmd->add_option("--out", eval_opts->out, "also write metrics JSON here");
    cmd->callback([=]() {
      const gdn::Bundle bundle = gdn::load_bundle(eval_opts->in);
      const std::vector<gdn::NodeId> truth =
          gdn::anomaly_ids(bundle.anomalies);
      const std::unordered_set<gdn::NodeId> truth_set(truth.begin(),
                                                      truth.end());
      std::ifstream in(eval_opts->scores);
      if (!in) throw std::runtime_error("cannot open " + eval_opts->scores);
      gdn::RankedScores ranked;
      std::string line;
      std::size_t lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || (lineno == 1 && line.rfind("node_id", 0) == 0))
          continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
          throw std::runtime_error(eval_opts->scores + ":" +
                                   std::to_string(lineno) +
                                   ": expected 'node_id,score'");
        const long id = std::stol(line.substr(0, comma));
        if (id < 0 || id >= bundle.graph.num_nodes())
          throw std::runtime_error(eval_opts->scores + ":" +
                                   std::to_string(lineno) +
                                   ": node id out of range");
        ranked.node_indices.push_back(static_cast<gdn::NodeId>(id));
        ranked.scores.push_back(std::stod(line.substr(comma + 1)));
        ranked.labels.push_back(
            truth_set.count(static_cast<gdn::NodeId>(id)) ? 1 : 0);
      }
      const gdn::MetricsReport report =
          gdn::compute_metrics(ranked, eval_opts->ks);
      json prec = json::object();
      for (const auto& [k, v] : report.precision_at_k)
        prec[std::to_string(k)] = v;
      const json j{{"auc_roc", report.auc_roc},
                   {"auc_pr", report.auc_pr},
                   {"precision_at_k", prec}};
      std::cout << j.dump(2) << "\n";
      if (!eval_opts->out.empty()) {
        std::ofstream out(eval_opts->out);
        if (!out) throw std::runtime_error("cannot write " + eval_opts->out);
        out << j.dump(2) << "\n";
      }
    });
  }

  // experiment + contamination share override plumbing.
  struct StudyOpts {
    std::string config_path;
    gdn::ExperimentConfig cfg;
    bool dry_run = false;
    std::vector<double> levels;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* mode_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* repeats_opt = nullptr;
    CLI::Option* shots_opt = nullptr;
    CLI::Option* epochs_opt = nullptr;
    CLI::Option* networks_opt = nullptr;
    std::uint64_t seed = 0;
    std::string mode, out_dir;
    int repeats = 5, shots = 10, epochs = 1000, networks = 5;

    void add_flags(CLI::App* cmd) {
      cmd->add_option("--config", config_path,
                      "JSON config (defaults used when omitted)");
      seed_opt = cmd->add_option("--seed", seed, "master seed override");
      out_opt = cmd->add_option("--out", out_dir, "output directory override");
      repeats_opt =
          cmd->add_option("--repeats", repeats, "repeat count override");
      shots_opt = cmd->add_option("--shots", shots, "shot count override");
      epochs_opt =
          cmd->add_option("--epochs", epochs, "training epoch override");
      networks_opt = cmd->add_option("--networks", networks,
                                     "synthetic network count override");
    }
    gdn::ExperimentConfig resolve() {
      gdn::ExperimentConfig c = config_path.empty()
                                    ? gdn::default_config()
                                    : gdn::load_config(config_path);
      if (seed_opt->count()) c.seed = seed;
      if (mode_opt && mode_opt->count()) c.mode = mode;
      if (out_opt->count()) c.output_dir = out_dir;
      if (repeats_opt->count()) c.repeats = repeats;
      if (shots_opt->count()) c.shots = shots;
      if (epochs_opt->count()) c.meta.epochs = epochs;
      if (networks_opt->count()) c.num_networks = networks;
      return c;
    }
  };

  auto exp_opts = std::make_shared<StudyOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "experiment", "run the full benchmark/training/evaluation pipeline");
    exp_opts->add_flags(cmd);
    exp_opts->mode_opt =
        cmd->add_option("--mode", exp_opts->mode,
                        "overall | ablation | shots_sweep | aux_sweep");
    cmd->add_flag("--dry-run", exp_opts->dry_run,
                  "print the resolved config and planned settings only");
    cmd->callback([=]() {
      const gdn::ExperimentConfig cfg = exp_opts->resolve();
      if (exp_opts->dry_run) {
        std::cout << gdn::config_to_json(cfg) << "\n";
        std::cout << "planned settings (" << cfg.repeats
                  << " repeats each):\n";
        for (const std::string& name : gdn::planned_settings(cfg))
          std::cout << "  " << name << "\n";
        return;
      }
      const std::string results = gdn::run_experiment(cfg);
      print_results_summary(results);
      std::cout << "wrote " << cfg.output_dir << "/results.json\n";
    });
  }

  auto cont_opts = std::make_shared<StudyOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "contamination", "detection quality versus unlabeled contamination");
    cont_opts->add_flags(cmd);
    cmd->add_option("--levels", cont_opts->levels,
                    "contamination ratios to test");
    cmd->callback([=]() {
      const gdn::ExperimentConfig cfg = cont_opts->resolve();
      const std::vector<double>& levels = cont_opts->levels.empty()
                                              ? cfg.contamination_levels
                                              : cont_opts->levels;
      const std::string results = gdn::run_contamination_study(cfg, levels);
      print_results_summary(results);
      std::cout << "wrote " << cfg.output_dir << "/results.json\n";
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
