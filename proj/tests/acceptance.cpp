// Acceptance gate: one line per criterion, nonzero exit if any fails.
//
// Criteria 5-9 share one synthetic suite (five repeats of: four auxiliary
// networks plus one target, n=2000, d=32, 5% injected anomalies) so the
// meta-trained initialization is reused across the shot, auxiliary-count,
// and contamination comparisons.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "gdn/experiment.hpp"

using namespace gdn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// Every parameter coordinate in a fixed order, shared by GdnParams and
// GdnGradients so analytic and numeric gradients align.
template <typename P>
std::vector<double*> coords(P& p) {
  std::vector<double*> out;
  for (std::size_t r = 0; r < p.encoder_weight.rows(); ++r)
    for (std::size_t c = 0; c < p.encoder_weight.cols(); ++c)
      out.push_back(&p.encoder_weight(r, c));
  for (double& b : p.encoder_bias) out.push_back(&b);
  for (std::size_t r = 0; r < p.hidden_weight.rows(); ++r)
    for (std::size_t c = 0; c < p.hidden_weight.cols(); ++c)
      out.push_back(&p.hidden_weight(r, c));
  for (double& b : p.hidden_bias) out.push_back(&b);
  for (double& w : p.output_weight) out.push_back(&w);
  out.push_back(&p.output_bias);
  return out;
}

// ---------------------------------------------------------------------------
// 1. Analytic gradients of the composed loss vs central finite differences.

bool c1_gradient_oracle(std::string& detail) {
  const auto start = Clock::now();
  const double h = 1e-6;
  double worst = 0.0;  // max error / tolerance ratio
  int done = 0;
  for (std::uint64_t attempt = 1; done < 20; ++attempt) {
    if (attempt > 200) {
      detail = "could not assemble 20 kink-free instances";
      return false;
    }
    Rng rng(derive_seed(4242, attempt));
    const NodeId n = static_cast<NodeId>(rng.uniform_int(5, 50));
    const std::size_t d = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const std::size_t h_e = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const std::size_t h_v = static_cast<std::size_t>(rng.uniform_int(1, 16));

    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v)
        if (rng.uniform() < 0.1) edges.push_back({u, v});
    Matrix feats(static_cast<std::size_t>(n), d);
    for (std::size_t i = 0; i < feats.rows(); ++i)
      for (std::size_t j = 0; j < d; ++j) feats(i, j) = rng.normal();
    const AttributedGraph g = AttributedGraph::build(n, edges, feats);
    const PropagatedFeatures prop =
        propagate(normalize_adjacency(g), g.features(), 2);

    GdnParams params = init_params(d, h_e, h_v, rng);
    std::vector<NodeId> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), NodeId{0});
    const std::vector<NodeId> batch = rng.sample(
        all, static_cast<std::size_t>(
                 rng.uniform_int(2, std::min<std::int64_t>(8, n))));
    std::vector<int> labels;
    for (std::size_t i = 0; i < batch.size(); ++i)
      labels.push_back(rng.uniform() < 0.5 ? 1 : 0);

    LossConfig cfg;
    ReferenceDistribution ref;
    ref.ref_mean = rng.uniform(-0.5, 0.5);
    ref.ref_std = rng.uniform(0.5, 2.0);
    cfg.reference = ref;

    // Reject instances near either nondifferentiable point: a hidden ReLU
    // pre-activation at zero, or a deviation at a loss kink.
    bool near_kink = false;
    const ScoreBatch scored = forward(params, prop, batch);
    for (std::size_t i = 0; i < batch.size() && !near_kink; ++i) {
      const double dev = deviation(scored.scores[i], ref);
      if (labels[i] == 0 && std::abs(dev) < 1e-3) near_kink = true;
      if (labels[i] == 1 && std::abs(dev - cfg.margin) < 1e-3)
        near_kink = true;
      const std::size_t row = static_cast<std::size_t>(batch[i]);
      for (std::size_t u = 0; u < h_v && !near_kink; ++u) {
        double pre = params.hidden_bias[u];
        for (std::size_t e = 0; e < h_e; ++e) {
          double z = params.encoder_bias[e];
          for (std::size_t c = 0; c < d; ++c)
            z += prop.values(row, c) * params.encoder_weight(c, e);
          pre += z * params.hidden_weight(e, u);
        }
        if (std::abs(pre) < 1e-4) near_kink = true;
      }
    }
    if (near_kink) continue;

    const auto [loss, dscore] = loss_and_grad(scored, labels, cfg);
    (void)loss;
    GdnGradients analytic = backward(params, prop, batch, dscore);
    const std::vector<double*> pc = coords(params);
    const std::vector<double*> gc = coords(analytic);

    const auto loss_at = [&]() {
      return loss_and_grad(forward(params, prop, batch), labels, cfg).first;
    };
    for (std::size_t k = 0; k < pc.size(); ++k) {
      const double saved = *pc[k];
      *pc[k] = saved + h;
      const double up = loss_at();
      *pc[k] = saved - h;
      const double down = loss_at();
      *pc[k] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double a = *gc[k];
      const double err = std::abs(fd - a);
      const double tol = std::max(1e-8, 1e-5 * std::max(std::abs(a),
                                                        std::abs(fd)));
      worst = std::max(worst, err / tol);
      if (err > tol) {
        detail = "instance " + std::to_string(done) + " coordinate " +
                 std::to_string(k) + ": analytic " + fmt(a) + " vs fd " +
                 fmt(fd);
        return false;
      }
    }
    ++done;
  }
  const double secs = seconds_since(start);
  detail = "20 instances, worst error at " + fmt(worst) +
           " of tolerance, " + fmt(secs) + "s";
  return secs < 10.0;
}

// ---------------------------------------------------------------------------
// 2. The three closed-form loss values.

bool c2_loss_units(std::string& detail) {
  ReferenceDistribution ref;  // mean 0, std 1
  LossConfig cfg;
  cfg.reference = ref;
  const auto loss_of = [&](double score, int label) {
    return loss_and_grad(ScoreBatch{{0}, {score}}, {label}, cfg).first;
  };
  const double normal_at_mean = loss_of(0.0, 0);
  const double anomaly_at_margin = loss_of(5.0, 1);
  const double anomaly_at_mean = loss_of(0.0, 1);
  detail = fmt(normal_at_mean) + " / " + fmt(anomaly_at_margin) + " / " +
           fmt(anomaly_at_mean);
  return normal_at_mean == 0.0 && anomaly_at_margin == 0.0 &&
         anomaly_at_mean == 5.0;
}

// ---------------------------------------------------------------------------
// 3. Reference sample statistics stay near the standard normal prior.

bool c3_reference_sampling(std::string& detail) {
  double worst_mean = 0.0, worst_std = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const ReferenceDistribution ref = sample_reference(0.0, 1.0, 5000, rng);
    worst_mean = std::max(worst_mean, std::abs(ref.ref_mean));
    worst_std = std::max(worst_std, std::abs(ref.ref_std - 1.0));
  }
  detail = "max |mu_r| " + fmt(worst_mean) + ", max |sigma_r-1| " +
           fmt(worst_std) + " over seeds 0..99";
  return worst_mean <= 0.05 && worst_std <= 0.05;
}

// ---------------------------------------------------------------------------
// 4. Ranking metrics equal brute-force oracles exactly.

std::vector<std::size_t> oracle_order(const RankedScores& r) {
  std::vector<std::size_t> idx(r.scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return r.scores[a] > r.scores[b];
  });
  return idx;
}

double oracle_auc(const RankedScores& r) {
  double wins = 0.0, ties = 0.0, pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < r.scores.size(); ++i) {
    if (r.labels[i] == 0) continue;
    pos += 1.0;
    for (std::size_t j = 0; j < r.scores.size(); ++j) {
      if (r.labels[j] == 1) continue;
      if (r.scores[i] > r.scores[j]) wins += 1.0;
      if (r.scores[i] == r.scores[j]) ties += 1.0;
    }
  }
  for (std::size_t j = 0; j < r.scores.size(); ++j)
    if (r.labels[j] == 0) neg += 1.0;
  return (wins + 0.5 * ties) / (pos * neg);
}

double oracle_ap(const RankedScores& r) {
  const std::vector<std::size_t> order = oracle_order(r);
  double pos = 0.0;
  for (int l : r.labels) pos += l;
  double sum = 0.0;
  for (std::size_t k = 1; k <= order.size(); ++k) {
    if (r.labels[order[k - 1]] != 1) continue;
    double tp = 0.0;
    for (std::size_t i = 0; i < k; ++i) tp += r.labels[order[i]];
    sum += tp / static_cast<double>(k);
  }
  return sum / pos;
}

double oracle_precision(const RankedScores& r, std::size_t k) {
  const std::vector<std::size_t> order = oracle_order(r);
  double tp = 0.0;
  for (std::size_t i = 0; i < k; ++i) tp += r.labels[order[i]];
  return tp / static_cast<double>(k);
}

bool c4_metric_oracles(std::string& detail) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng rng(derive_seed(99, i));
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 200));
    RankedScores r;
    for (std::size_t j = 0; j < n; ++j) {
      r.node_indices.push_back(static_cast<NodeId>(j));
      r.scores.push_back(0.1 * rng.uniform_int(0, 9));
      r.labels.push_back(rng.uniform() < 0.3 ? 1 : 0);
    }
    r.labels.front() = 1;  // force both classes
    r.labels.back() = 0;
    const std::vector<std::size_t> ks = {1, std::max<std::size_t>(1, n / 2),
                                         n};
    if (auc_roc(r) != oracle_auc(r) || auc_pr(r) != oracle_ap(r)) {
      detail = "mismatch on instance " + std::to_string(i);
      return false;
    }
    for (std::size_t k : ks)
      if (precision_at_k(r, k) != oracle_precision(r, k)) {
        detail = "precision mismatch on instance " + std::to_string(i);
        return false;
      }
  }
  detail = "100 instances bit-identical";
  return true;
}

// ---------------------------------------------------------------------------
// Shared synthetic suite for criteria 5-9.

struct SuiteOutcome {
  std::vector<double> random_auc, gdn, gdn_minus, meta, p1, rc1, rc10;
  std::array<std::vector<double>, 4> shot;  // 1, 3, 5, 10 shots
  double seconds = 0.0;
};

SuiteOutcome run_suite() {
  const auto start = Clock::now();
  ExperimentConfig cfg;  // defaults: n=2000, d=32, 5 networks, 5%, 10-shot
  cfg.metric_ks = {100};

  SuiteOutcome out;
  for (int s = 0; s < 5; ++s) {
    const PreparedData data = prepare_repeat(cfg, s);
    out.random_auc.push_back(run_variant("random", data, cfg).metrics.auc_roc);
    out.gdn.push_back(run_variant("gdn", data, cfg).metrics.auc_roc);
    out.gdn_minus.push_back(
        run_variant("gdn_minus", data, cfg).metrics.auc_roc);

    MetaConfig mc = cfg.meta;
    mc.seed = data.run_seed;
    mc.num_aux = static_cast<int>(data.aux_tasks.size());
    const GdnParams meta0 = train_meta(data.aux_tasks, mc);
    const auto tuned_auc = [&](const GdnParams& tuned,
                               const PreparedData& d) {
      const ScoreBatch sb =
          score_nodes(tuned, d.target_task.propagated, d.test_nodes);
      return auc_roc(RankedScores{d.test_nodes, sb.scores, d.test_labels});
    };

    const double meta_auc =
        tuned_auc(fine_tune(meta0, data.target_task, mc, &data.validation),
                  data);
    out.meta.push_back(meta_auc);
    out.shot[3].push_back(meta_auc);  // this config is the (10 shot) setting

    // Fewer shots: same networks and split, smaller label budget, batch
    // scaled with it as in the shots-sweep study mode.
    const int grid[3][2] = {{1, 2}, {3, 4}, {5, 8}};
    for (int j = 0; j < 3; ++j) {
      ExperimentConfig cs = cfg;
      cs.shots = grid[j][0];
      cs.meta.batch_size = grid[j][1];
      const PreparedData ds = prepare_repeat(cs, s);
      MetaConfig ms = mc;
      ms.batch_size = grid[j][1];
      out.shot[static_cast<std::size_t>(j)].push_back(tuned_auc(
          fine_tune(meta0, ds.target_task, ms, &ds.validation), ds));
    }

    // Single auxiliary network.
    MetaConfig m1 = mc;
    m1.num_aux = 1;
    const GdnParams meta1 = train_meta({data.aux_tasks[0]}, m1);
    out.p1.push_back(tuned_auc(
        fine_tune(meta1, data.target_task, mc, &data.validation), data));

    // Contaminated unlabeled pools.
    for (const double rc : {0.01, 0.10}) {
      Rng crng(derive_seed(data.run_seed, kContaminationStream));
      const Task thinned = set_contamination(data.target_task, rc, crng);
      const double auc = tuned_auc(
          fine_tune(meta0, thinned, mc, &data.validation), data);
      (rc == 0.01 ? out.rc1 : out.rc10).push_back(auc);
    }
  }
  out.seconds = seconds_since(start);
  return out;
}

bool c5_end_to_end(const SuiteOutcome& suite, std::string& detail) {
  const double gdn = mean(suite.gdn);
  const double meta = mean(suite.meta);
  const double rnd = mean(suite.random_auc);
  detail = "gdn " + fmt(gdn) + ", meta " + fmt(meta) + ", random " +
           fmt(rnd) + ", suite " + fmt(suite.seconds) + "s";
  return gdn >= 0.75 && meta >= gdn && gdn >= 0.7 && meta >= 0.7 &&
         suite.seconds < 600.0;
}

bool c6_shot_trend(const SuiteOutcome& suite, std::string& detail) {
  std::array<double, 4> m{};
  for (std::size_t j = 0; j < 4; ++j) m[j] = mean(suite.shot[j]);
  detail = "1/3/5/10-shot " + fmt(m[0]) + " / " + fmt(m[1]) + " / " +
           fmt(m[2]) + " / " + fmt(m[3]);
  for (std::size_t j = 0; j + 1 < 4; ++j)
    if (m[j + 1] < m[j] - 0.01) return false;
  return true;
}

bool c7_ablation(const SuiteOutcome& suite, std::string& detail) {
  const double minus = mean(suite.gdn_minus);
  const double gdn = mean(suite.gdn);
  const double meta = mean(suite.meta);
  detail = "gdn- " + fmt(minus) + " <= gdn " + fmt(gdn) + " <= meta " +
           fmt(meta);
  return minus <= gdn + 0.01 && gdn <= meta + 0.01;
}

bool c8_aux_sensitivity(const SuiteOutcome& suite, std::string& detail) {
  const double p1 = mean(suite.p1);
  const double p4 = mean(suite.meta);
  detail = "P=1 " + fmt(p1) + ", P=4 " + fmt(p4);
  return p4 >= p1;
}

bool c9_contamination(const SuiteOutcome& suite, std::string& detail) {
  const double low = mean(suite.rc1);
  const double high = mean(suite.rc10);
  detail = "r_c=1% " + fmt(low) + ", r_c=10% " + fmt(high);
  return std::abs(high - low) <= 0.15;
}

// ---------------------------------------------------------------------------
// 10. Combined-injection arithmetic at benchmark scale.

bool c10_injection_arithmetic(std::string& detail) {
  const NodeId n = 3000;
  Matrix feats(static_cast<std::size_t>(n), 8);
  Rng frng(7);
  for (std::size_t i = 0; i < feats.rows(); ++i)
    for (std::size_t j = 0; j < 8; ++j) feats(i, j) = frng.normal();
  const AttributedGraph g = AttributedGraph::build(n, {}, feats);
  const Matrix original = g.features();

  InjectionSpec spec;  // clique size 15, candidate pool 50
  Rng rng(11);
  const InjectionReport report = inject_combined(g, 0.05, spec, rng);
  detail = std::to_string(report.structural_anomalies.size()) +
           " structural + " + std::to_string(report.contextual_anomalies.size()) +
           " contextual, " + std::to_string(report.graph.num_edges()) +
           " edges";
  if (report.structural_anomalies.size() != 75) return false;
  if (report.contextual_anomalies.size() != 75) return false;
  if (report.graph.num_edges() != 5 * (15 * 14 / 2)) return false;

  report.graph.validate();
  // Five whole cliques, in the order the nodes were drawn.
  for (std::size_t c = 0; c < 5; ++c)
    for (std::size_t i = 0; i < 15; ++i)
      for (std::size_t j = i + 1; j < 15; ++j)
        if (!report.graph.has_edge(report.structural_anomalies[c * 15 + i],
                                   report.structural_anomalies[c * 15 + j]))
          return false;
  // Disjoint target sets; every contextual row was actually rewritten.
  std::vector<NodeId> both = report.structural_anomalies;
  both.insert(both.end(), report.contextual_anomalies.begin(),
              report.contextual_anomalies.end());
  std::sort(both.begin(), both.end());
  if (std::adjacent_find(both.begin(), both.end()) != both.end())
    return false;
  for (const NodeId v : report.contextual_anomalies) {
    bool changed = false;
    for (std::size_t j = 0; j < 8; ++j)
      if (report.graph.features()(static_cast<std::size_t>(v), j) !=
          original(static_cast<std::size_t>(v), j))
        changed = true;
    if (!changed) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// 11. Byte-identical experiment reruns through the CLI.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool c11_determinism(std::string& detail) {
  const fs::path dir = fs::temp_directory_path() / "gdn_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg_path = dir / "config.json";
  std::ofstream(cfg_path) << R"({
    "synth": {"n": 300, "d": 8, "blocks": 3, "intra_p": 0.05,
              "inter_p": 0.005, "feature_shift": 3.0},
    "num_networks": 2,
    "meta": {"epochs": 30, "inner_steps": 2, "batch_size": 8,
             "fine_tune_epochs": 20, "encoder_dim": 8, "hidden_dim": 32,
             "sample_count": 1000},
    "injection_rate": 0.08,
    "injection": {"clique_size": 4, "candidate_pool": 20},
    "shots": 3,
    "metric_ks": [10],
    "repeats": 1,
    "seed": 77
  })";

  for (const char* run : {"run_a", "run_b"}) {
    fs::create_directories(dir / run);
    const std::string cmd = std::string(GDN_CLI_PATH) + " experiment --config " +
                            cfg_path.string() + " --out " +
                            (dir / run).string() + " > " +
                            (dir / run / "stdout.txt").string() + " 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      detail = std::string("experiment run failed: ") +
               slurp(dir / run / "stdout.txt");
      return false;
    }
  }
  const std::string a = slurp(dir / "run_a" / "scores.csv");
  const std::string b = slurp(dir / "run_b" / "scores.csv");
  detail = "scores.csv " + std::to_string(a.size()) + " bytes, reruns " +
           (a == b ? "identical" : "DIFFER");
  const bool ok = !a.empty() && a == b;
  if (ok) fs::remove_all(dir);
  return ok;
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int idx, const char* name, bool pass,
                          const std::string& detail) {
    std::printf("[%s] %2d. %s (%s)\n", pass ? "PASS" : "FAIL", idx, name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  };

  std::string detail;
  report(1, "gradient oracle vs finite differences",
         c1_gradient_oracle(detail), detail);
  report(2, "closed-form loss values", c2_loss_units(detail), detail);
  report(3, "reference sampling accuracy", c3_reference_sampling(detail),
         detail);
  report(4, "metrics equal brute-force oracles", c4_metric_oracles(detail),
         detail);

  const SuiteOutcome suite = run_suite();
  report(5, "synthetic end-to-end detection", c5_end_to_end(suite, detail),
         detail);
  report(6, "few-shot monotonic trend", c6_shot_trend(suite, detail), detail);
  report(7, "ablation ordering", c7_ablation(suite, detail), detail);
  report(8, "auxiliary-network sensitivity",
         c8_aux_sensitivity(suite, detail), detail);
  report(9, "contamination robustness", c9_contamination(suite, detail),
         detail);
  report(10, "combined injection arithmetic",
         c10_injection_arithmetic(detail), detail);
  report(11, "byte-identical experiment reruns", c11_determinism(detail),
         detail);

  if (failures > 0) std::printf("%d criteria FAILED\n", failures);
  return failures;
}
