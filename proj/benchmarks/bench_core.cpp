// Microbenchmarks for the inner-loop kernels: feature propagation, scoring
// forward/backward, one meta-epoch, and metric computation.

#include <algorithm>
#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "gdn/data_io.hpp"
#include "gdn/injection.hpp"
#include "gdn/metrics.hpp"
#include "gdn/trainer.hpp"

namespace {

using namespace gdn;

AttributedGraph make_network(NodeId n, std::size_t d, std::uint64_t seed) {
  SynthSpec spec;
  spec.n = n;
  spec.d = d;
  Rng rng(seed);
  return generate_synthetic(spec, rng);
}

Task make_task(NodeId n, std::size_t d, std::uint64_t seed) {
  AttributedGraph g = make_network(n, d, seed);
  Rng rng(seed + 1);
  InjectionSpec spec;
  spec.clique_size = 5;
  InjectionReport report = inject_combined(g, 0.05, spec, rng);

  Task task;
  task.ground_truth = report.structural_anomalies;
  task.ground_truth.insert(task.ground_truth.end(),
                           report.contextual_anomalies.begin(),
                           report.contextual_anomalies.end());
  std::sort(task.ground_truth.begin(), task.ground_truth.end());
  task.labeled = task.ground_truth;
  for (NodeId v = 0; v < report.graph.num_nodes(); ++v)
    if (!std::binary_search(task.ground_truth.begin(),
                            task.ground_truth.end(), v))
      task.unlabeled.push_back(v);
  const NormalizedAdjacency s = normalize_adjacency(report.graph);
  task.propagated = propagate(s, report.graph.features(), 2);
  task.graph = std::move(report.graph);
  return task;
}

void BM_Propagate(benchmark::State& state) {
  const NodeId n = static_cast<NodeId>(state.range(0));
  const AttributedGraph g = make_network(n, 32, 1);
  const NormalizedAdjacency s = normalize_adjacency(g);
  for (auto _ : state)
    benchmark::DoNotOptimize(propagate(s, g.features(), 2));
}
BENCHMARK(BM_Propagate)->Arg(500)->Arg(2000)->Arg(8000);

void BM_ForwardBatch(benchmark::State& state) {
  const Task task = make_task(2000, 32, 2);
  Rng rng(3);
  const GdnParams params = init_params(32, 64, 512, rng);
  std::vector<NodeId> batch(static_cast<std::size_t>(state.range(0)));
  std::iota(batch.begin(), batch.end(), NodeId{0});
  for (auto _ : state)
    benchmark::DoNotOptimize(forward(params, task.propagated, batch));
}
BENCHMARK(BM_ForwardBatch)->Arg(16)->Arg(256)->Arg(2000);

void BM_BackwardBatch(benchmark::State& state) {
  const Task task = make_task(2000, 32, 2);
  Rng rng(3);
  const GdnParams params = init_params(32, 64, 512, rng);
  std::vector<NodeId> batch(static_cast<std::size_t>(state.range(0)));
  std::iota(batch.begin(), batch.end(), NodeId{0});
  const std::vector<double> upstream(batch.size(), 0.25);
  for (auto _ : state)
    benchmark::DoNotOptimize(backward(params, task.propagated, batch,
                                      upstream));
}
BENCHMARK(BM_BackwardBatch)->Arg(16)->Arg(256);

void BM_MetaEpoch(benchmark::State& state) {
  std::vector<Task> tasks;
  for (std::uint64_t i = 0; i < 4; ++i)
    tasks.push_back(make_task(2000, 32, 10 + i));
  MetaConfig cfg;
  cfg.num_aux = 4;
  Rng rng(5);
  TrainState st;
  st.params = init_params(32, cfg.encoder_dim, cfg.hidden_dim, rng);
  st.seed = 5;
  st.reference = sample_reference(cfg.loss.prior_mean, cfg.loss.prior_std,
                                  cfg.loss.sample_count, rng);
  for (auto _ : state) {
    st = meta_epoch(std::move(st), tasks, cfg);
    benchmark::DoNotOptimize(st.params.output_bias);
  }
}
BENCHMARK(BM_MetaEpoch)->Unit(benchmark::kMillisecond);

void BM_AucRoc(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(8);
  RankedScores r;
  for (std::size_t i = 0; i < n; ++i) {
    r.node_indices.push_back(static_cast<NodeId>(i));
    r.scores.push_back(rng.uniform());
    r.labels.push_back(i % 20 == 0 ? 1 : 0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(auc_roc(r));
}
BENCHMARK(BM_AucRoc)->Arg(2000)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();
