#include "gdn/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace gdn {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& file, std::size_t line,
                             const std::string& what) {
  throw std::runtime_error(file + ":" + std::to_string(line) + ": " + what);
}

long long parse_int(std::string_view token, const std::string& file,
                    std::size_t line) {
  long long value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    parse_fail(file, line, "expected integer, got '" + std::string(token) +
                               "'");
  return value;
}

double parse_real(std::string_view token, const std::string& file,
                  std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    parse_fail(file, line, "expected real, got '" + std::string(token) + "'");
  return value;
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{})
    throw std::runtime_error("failed to format real value");
  return {buf, ptr};
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

Bundle load_bundle(const std::string& dir) {
  const fs::path root(dir);
  for (const char* name :
       {"edges.tsv", "features.csv", "labels.csv", "meta.json"})
    if (!fs::exists(root / name))
      throw std::runtime_error("bundle " + dir + " is missing " + name);

  const std::string meta_path = (root / "meta.json").string();
  json meta;
  try {
    std::ifstream in = open_input(meta_path);
    in >> meta;
  } catch (const json::exception& e) {
    throw std::runtime_error(meta_path + ": " + e.what());
  }
  const auto n = meta.at("n").get<long long>();
  const auto d = meta.at("d").get<long long>();
  if (n < 0 || d < 1)
    throw std::runtime_error(meta_path + ": invalid n or d");

  const std::string feat_path = (root / "features.csv").string();
  Matrix features(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
  {
    std::ifstream in = open_input(feat_path);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      const auto fields = split(trim_cr(line), ',');
      if (row >= static_cast<std::size_t>(n))
        parse_fail(feat_path, row + 1, "more feature rows than n=" +
                                           std::to_string(n));
      if (fields.size() != static_cast<std::size_t>(d))
        parse_fail(feat_path, row + 1,
                   "expected " + std::to_string(d) + " values, got " +
                       std::to_string(fields.size()));
      for (std::size_t c = 0; c < fields.size(); ++c) {
        const double v = parse_real(fields[c], feat_path, row + 1);
        if (!std::isfinite(v))
          parse_fail(feat_path, row + 1, "non-finite feature value");
        features(row, c) = v;
      }
      ++row;
    }
    if (row != static_cast<std::size_t>(n))
      throw std::runtime_error(feat_path + ": " + std::to_string(row) +
                               " rows for n=" + std::to_string(n));
  }

  const std::string edge_path = (root / "edges.tsv").string();
  std::vector<Edge> edges;
  {
    std::ifstream in = open_input(edge_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto sv = trim_cr(line);
      if (sv.empty()) continue;
      const auto fields = split(sv, '\t');
      if (fields.size() != 2)
        parse_fail(edge_path, lineno, "expected two tab-separated ids");
      const long long u = parse_int(fields[0], edge_path, lineno);
      const long long v = parse_int(fields[1], edge_path, lineno);
      if (u < 0 || u >= n || v < 0 || v >= n)
        parse_fail(edge_path, lineno, "node id out of range [0," +
                                          std::to_string(n) + ")");
      edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
    }
  }

  Bundle bundle;
  bundle.name = meta.value("name", std::string{});
  bundle.graph = AttributedGraph::build(static_cast<NodeId>(n), edges,
                                        std::move(features), &bundle.stats);

  const std::string label_path = (root / "labels.csv").string();
  {
    std::ifstream in = open_input(label_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto sv = trim_cr(line);
      if (sv.empty()) continue;
      const auto fields = split(sv, ',');
      if (fields.size() != 2)
        parse_fail(label_path, lineno, "expected 'node_id,tag'");
      const long long id = parse_int(fields[0], label_path, lineno);
      if (id < 0 || id >= n)
        parse_fail(label_path, lineno, "node id out of range [0," +
                                           std::to_string(n) + ")");
      AnomalyType type;
      if (fields[1] == "1")
        type = AnomalyType::kGeneric;
      else if (fields[1] == "structural")
        type = AnomalyType::kStructural;
      else if (fields[1] == "contextual")
        type = AnomalyType::kContextual;
      else
        parse_fail(label_path, lineno,
                   "unknown tag '" + std::string(fields[1]) + "'");
      bundle.anomalies.push_back({static_cast<NodeId>(id), type});
    }
  }
  return bundle;
}

void save_bundle(const Bundle& bundle, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);
  const auto n = bundle.graph.num_nodes();
  const Matrix& feats = bundle.graph.features();

  {
    std::ofstream out(root / "edges.tsv");
    for (const Edge& e : bundle.graph.edge_list())
      out << e.u << '\t' << e.v << '\n';
    if (!out) throw std::runtime_error("failed writing edges.tsv in " + dir);
  }
  {
    std::ofstream out(root / "features.csv");
    for (std::size_t r = 0; r < feats.rows(); ++r) {
      for (std::size_t c = 0; c < feats.cols(); ++c) {
        if (c) out << ',';
        out << format_real(feats(r, c));
      }
      out << '\n';
    }
    if (!out)
      throw std::runtime_error("failed writing features.csv in " + dir);
  }
  {
    std::ofstream out(root / "labels.csv");
    for (const LabeledAnomaly& a : bundle.anomalies) {
      const char* tag = a.type == AnomalyType::kStructural  ? "structural"
                        : a.type == AnomalyType::kContextual ? "contextual"
                                                             : "1";
      out << a.node << ',' << tag << '\n';
    }
    if (!out) throw std::runtime_error("failed writing labels.csv in " + dir);
  }
  {
    const json meta{{"n", n}, {"d", feats.cols()}, {"name", bundle.name}};
    std::ofstream out(root / "meta.json");
    out << meta.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing meta.json in " + dir);
  }
}

std::vector<NodeId> anomaly_ids(const std::vector<LabeledAnomaly>& anomalies) {
  std::vector<NodeId> ids;
  ids.reserve(anomalies.size());
  for (const LabeledAnomaly& a : anomalies) ids.push_back(a.node);
  return ids;
}

std::vector<AttributedGraph> partition_network(const AttributedGraph& graph,
                                               int parts, Rng& rng) {
  const NodeId n = graph.num_nodes();
  if (parts < 2) throw std::invalid_argument("partition: need >= 2 parts");
  if (n < parts)
    throw std::invalid_argument("partition: fewer nodes than parts");

  std::vector<NodeId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), NodeId{0});
  rng.shuffle(order);

  const std::size_t base = static_cast<std::size_t>(n) /
                           static_cast<std::size_t>(parts);
  const std::size_t extra = static_cast<std::size_t>(n) %
                            static_cast<std::size_t>(parts);
  std::vector<AttributedGraph> out;
  out.reserve(static_cast<std::size_t>(parts));
  std::size_t cursor = 0;
  for (int p = 0; p < parts; ++p) {
    const std::size_t size = base + (static_cast<std::size_t>(p) < extra);
    std::vector<NodeId> members(order.begin() + static_cast<long>(cursor),
                                order.begin() +
                                    static_cast<long>(cursor + size));
    cursor += size;
    std::sort(members.begin(), members.end());

    std::unordered_map<NodeId, NodeId> local;
    local.reserve(members.size());
    for (std::size_t i = 0; i < members.size(); ++i)
      local[members[i]] = static_cast<NodeId>(i);

    Matrix feats(members.size(), graph.features().cols());
    for (std::size_t i = 0; i < members.size(); ++i) {
      const double* src =
          graph.features().row(static_cast<std::size_t>(members[i]));
      std::copy(src, src + feats.cols(), feats.row(i));
    }
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < members.size(); ++i)
      for (NodeId nb : graph.neighbors(members[i])) {
        const auto it = local.find(nb);
        if (it != local.end() && members[i] < nb)
          edges.push_back({static_cast<NodeId>(i), it->second});
      }
    AttributedGraph part = AttributedGraph::build(
        static_cast<NodeId>(members.size()), edges, std::move(feats));
    part.set_external_ids(std::move(members));
    out.push_back(std::move(part));
  }
  return out;
}

std::vector<NodeId> localize(const AttributedGraph& part,
                             const std::vector<NodeId>& global_ids) {
  const auto& ext = part.external_ids();
  std::unordered_map<NodeId, NodeId> local;
  local.reserve(ext.size());
  for (std::size_t i = 0; i < ext.size(); ++i)
    local[ext[i]] = static_cast<NodeId>(i);
  std::vector<NodeId> out;
  for (NodeId g : global_ids) {
    const auto it = local.find(g);
    if (it != local.end()) out.push_back(it->second);
  }
  std::sort(out.begin(), out.end());
  return out;
}

TargetSplit split_target(const std::vector<NodeId>& nodes,
                         const SplitSpec& spec, Rng& rng) {
  const double fracs[3] = {spec.fine_tune_fraction, spec.validation_fraction,
                           spec.test_fraction};
  double sum = 0.0;
  for (double f : fracs) {
    if (!(f > 0.0)) throw std::invalid_argument("split: fractions must be > 0");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split: fractions must sum to 1");

  const std::size_t n = nodes.size();
  std::size_t counts[3];
  double remainders[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double quota = fracs[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    remainders[i] = quota - std::floor(quota);
    assigned += counts[i];
  }
  // Largest remainder; ties resolved toward the earlier split.
  for (std::size_t left = n - assigned; left > 0; --left) {
    int pick = 0;
    for (int i = 1; i < 3; ++i)
      if (remainders[i] > remainders[pick]) pick = i;
    ++counts[pick];
    remainders[pick] = -1.0;
  }
  for (std::size_t c : counts)
    if (c == 0)
      throw std::invalid_argument("split: a split came out empty; need more "
                                  "nodes");

  std::vector<NodeId> shuffled = nodes;
  rng.shuffle(shuffled);
  TargetSplit out;
  out.fine_tune.assign(shuffled.begin(),
                       shuffled.begin() + static_cast<long>(counts[0]));
  out.validation.assign(
      shuffled.begin() + static_cast<long>(counts[0]),
      shuffled.begin() + static_cast<long>(counts[0] + counts[1]));
  out.test.assign(shuffled.begin() + static_cast<long>(counts[0] + counts[1]),
                  shuffled.end());
  return out;
}

std::vector<NodeId> select_shots(const std::vector<NodeId>& anomalies,
                                 int shots, Rng& rng) {
  if (shots < 1) throw std::invalid_argument("select_shots: shots must be >= 1");
  if (static_cast<std::size_t>(shots) > anomalies.size())
    throw std::invalid_argument(
        "select_shots: requested " + std::to_string(shots) + " of " +
        std::to_string(anomalies.size()) + " available anomalies");
  std::vector<NodeId> out =
      rng.sample(anomalies, static_cast<std::size_t>(shots));
  std::sort(out.begin(), out.end());
  return out;
}

AttributedGraph generate_synthetic(const SynthSpec& spec, Rng& rng) {
  if (spec.n < 1) throw std::invalid_argument("synthetic: n must be >= 1");
  if (spec.d < 1) throw std::invalid_argument("synthetic: d must be >= 1");
  if (spec.blocks < 1)
    throw std::invalid_argument("synthetic: blocks must be >= 1");
  for (double p : {spec.intra_p, spec.inter_p})
    if (!(p >= 0.0) || p > 1.0)
      throw std::invalid_argument("synthetic: probabilities must be in [0,1]");

  std::vector<Edge> edges;
  for (NodeId i = 0; i < spec.n; ++i)
    for (NodeId j = i + 1; j < spec.n; ++j) {
      const double p =
          (i % spec.blocks == j % spec.blocks) ? spec.intra_p : spec.inter_p;
      if (rng.uniform() < p) edges.push_back({i, j});
    }

  Matrix feats(static_cast<std::size_t>(spec.n), spec.d);
  for (NodeId i = 0; i < spec.n; ++i) {
    const std::size_t shift_coord =
        static_cast<std::size_t>(i % spec.blocks) % spec.d;
    double* row = feats.row(static_cast<std::size_t>(i));
    for (std::size_t c = 0; c < spec.d; ++c) {
      row[c] = rng.normal();
      if (c == shift_coord) row[c] += spec.feature_shift;
    }
  }
  return AttributedGraph::build(spec.n, edges, std::move(feats));
}

}  // namespace gdn
