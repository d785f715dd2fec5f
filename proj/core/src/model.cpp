#include "gdn/model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gdn {
namespace {

using nlohmann::json;

void check_shapes(const GdnParams& p) {
  if (p.encoder_bias.size() != p.encoder_dim() ||
      p.hidden_weight.rows() != p.encoder_dim() ||
      p.hidden_bias.size() != p.hidden_dim() ||
      p.output_weight.size() != p.hidden_dim())
    throw std::invalid_argument("gdn params: incongruent shapes");
}

}  // namespace

bool GdnParams::all_finite() const {
  if (!encoder_weight.all_finite() || !hidden_weight.all_finite()) return false;
  for (double v : encoder_bias)
    if (!std::isfinite(v)) return false;
  for (double v : hidden_bias)
    if (!std::isfinite(v)) return false;
  for (double v : output_weight)
    if (!std::isfinite(v)) return false;
  return std::isfinite(output_bias);
}

GdnParams init_params(std::size_t d, std::size_t h_e, std::size_t h_v,
                      Rng& rng) {
  if (d < 1 || h_e < 1 || h_v < 1)
    throw std::invalid_argument("init_params: dimensions must be >= 1");
  GdnParams p;
  p.encoder_weight = Matrix(d, h_e);
  p.encoder_bias.assign(h_e, 0.0);
  p.hidden_weight = Matrix(h_e, h_v);
  p.hidden_bias.assign(h_v, 0.0);
  p.output_weight.assign(h_v, 0.0);
  p.output_bias = 0.0;

  const double be = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& w : p.encoder_weight.data()) w = rng.uniform(-be, be);
  const double bh = 1.0 / std::sqrt(static_cast<double>(h_e));
  for (double& w : p.hidden_weight.data()) w = rng.uniform(-bh, bh);
  const double bo = 1.0 / std::sqrt(static_cast<double>(h_v));
  for (double& w : p.output_weight) w = rng.uniform(-bo, bo);
  return p;
}

ScoreBatch forward(const GdnParams& params, const PropagatedFeatures& feats,
                   const std::vector<NodeId>& batch) {
  check_shapes(params);
  const Matrix& x = feats.values;
  if (x.cols() != params.input_dim())
    throw std::invalid_argument("forward: feature dim != encoder input dim");
  const std::size_t he = params.encoder_dim();
  const std::size_t hv = params.hidden_dim();

  ScoreBatch out;
  out.node_indices = batch;
  out.scores.reserve(batch.size());
  std::vector<double> z(he), o(hv);
  for (NodeId id : batch) {
    if (id < 0 || static_cast<std::size_t>(id) >= x.rows())
      throw std::out_of_range("forward: node index out of range");
    const double* xi = x.row(static_cast<std::size_t>(id));
    for (std::size_t j = 0; j < he; ++j) z[j] = params.encoder_bias[j];
    for (std::size_t k = 0; k < x.cols(); ++k) {
      const double xv = xi[k];
      const double* wrow = params.encoder_weight.row(k);
      for (std::size_t j = 0; j < he; ++j) z[j] += xv * wrow[j];
    }
    for (std::size_t j = 0; j < hv; ++j) o[j] = params.hidden_bias[j];
    for (std::size_t k = 0; k < he; ++k) {
      const double zv = z[k];
      const double* wrow = params.hidden_weight.row(k);
      for (std::size_t j = 0; j < hv; ++j) o[j] += zv * wrow[j];
    }
    double s = params.output_bias;
    for (std::size_t j = 0; j < hv; ++j)
      if (o[j] > 0.0) s += o[j] * params.output_weight[j];
    out.scores.push_back(s);
  }
  return out;
}

GdnGradients backward(const GdnParams& params, const PropagatedFeatures& feats,
                      const std::vector<NodeId>& batch,
                      const std::vector<double>& dloss_dscore) {
  check_shapes(params);
  if (dloss_dscore.size() != batch.size())
    throw std::invalid_argument("backward: gradient list misaligned");
  const Matrix& x = feats.values;
  if (x.cols() != params.input_dim())
    throw std::invalid_argument("backward: feature dim != encoder input dim");
  const std::size_t d = params.input_dim();
  const std::size_t he = params.encoder_dim();
  const std::size_t hv = params.hidden_dim();

  GdnGradients g;
  g.encoder_weight = Matrix(d, he);
  g.encoder_bias.assign(he, 0.0);
  g.hidden_weight = Matrix(he, hv);
  g.hidden_bias.assign(hv, 0.0);
  g.output_weight.assign(hv, 0.0);
  g.output_bias = 0.0;

  std::vector<double> z(he), pre(hv), dout(hv), dz(he);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const NodeId id = batch[b];
    if (id < 0 || static_cast<std::size_t>(id) >= x.rows())
      throw std::out_of_range("backward: node index out of range");
    const double gs = dloss_dscore[b];
    const double* xi = x.row(static_cast<std::size_t>(id));

    // Recompute activations for this node.
    for (std::size_t j = 0; j < he; ++j) z[j] = params.encoder_bias[j];
    for (std::size_t k = 0; k < d; ++k) {
      const double xv = xi[k];
      const double* wrow = params.encoder_weight.row(k);
      for (std::size_t j = 0; j < he; ++j) z[j] += xv * wrow[j];
    }
    for (std::size_t j = 0; j < hv; ++j) pre[j] = params.hidden_bias[j];
    for (std::size_t k = 0; k < he; ++k) {
      const double zv = z[k];
      const double* wrow = params.hidden_weight.row(k);
      for (std::size_t j = 0; j < hv; ++j) pre[j] += zv * wrow[j];
    }

    g.output_bias += gs;
    for (std::size_t j = 0; j < hv; ++j) {
      const double oj = pre[j] > 0.0 ? pre[j] : 0.0;
      g.output_weight[j] += gs * oj;
      dout[j] = pre[j] > 0.0 ? gs * params.output_weight[j] : 0.0;
    }
    for (std::size_t j = 0; j < hv; ++j) g.hidden_bias[j] += dout[j];
    for (std::size_t k = 0; k < he; ++k) {
      const double zv = z[k];
      double* grow = g.hidden_weight.row(k);
      const double* wrow = params.hidden_weight.row(k);
      double acc = 0.0;
      for (std::size_t j = 0; j < hv; ++j) {
        grow[j] += zv * dout[j];
        acc += wrow[j] * dout[j];
      }
      dz[k] = acc;
    }
    for (std::size_t j = 0; j < he; ++j) g.encoder_bias[j] += dz[j];
    for (std::size_t k = 0; k < d; ++k) {
      const double xv = xi[k];
      double* grow = g.encoder_weight.row(k);
      for (std::size_t j = 0; j < he; ++j) grow[j] += xv * dz[j];
    }
  }
  return g;
}

GdnParams apply_gradient_step(const GdnParams& params,
                              const GdnGradients& grads, double lr) {
  if (!std::isfinite(lr))
    throw std::invalid_argument("apply_gradient_step: non-finite rate");
  GdnParams out = params;
  for (std::size_t i = 0; i < out.encoder_weight.data().size(); ++i)
    out.encoder_weight.data()[i] -= lr * grads.encoder_weight.data()[i];
  for (std::size_t i = 0; i < out.encoder_bias.size(); ++i)
    out.encoder_bias[i] -= lr * grads.encoder_bias[i];
  for (std::size_t i = 0; i < out.hidden_weight.data().size(); ++i)
    out.hidden_weight.data()[i] -= lr * grads.hidden_weight.data()[i];
  for (std::size_t i = 0; i < out.hidden_bias.size(); ++i)
    out.hidden_bias[i] -= lr * grads.hidden_bias[i];
  for (std::size_t i = 0; i < out.output_weight.size(); ++i)
    out.output_weight[i] -= lr * grads.output_weight[i];
  out.output_bias -= lr * grads.output_bias;
  return out;
}

void accumulate(GdnGradients& into, const GdnGradients& from) {
  for (std::size_t i = 0; i < into.encoder_weight.data().size(); ++i)
    into.encoder_weight.data()[i] += from.encoder_weight.data()[i];
  for (std::size_t i = 0; i < into.encoder_bias.size(); ++i)
    into.encoder_bias[i] += from.encoder_bias[i];
  for (std::size_t i = 0; i < into.hidden_weight.data().size(); ++i)
    into.hidden_weight.data()[i] += from.hidden_weight.data()[i];
  for (std::size_t i = 0; i < into.hidden_bias.size(); ++i)
    into.hidden_bias[i] += from.hidden_bias[i];
  for (std::size_t i = 0; i < into.output_weight.size(); ++i)
    into.output_weight[i] += from.output_weight[i];
  into.output_bias += from.output_bias;
}

namespace {

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"values", m.data()}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto vals = j.at("values").get<std::vector<double>>();
  if (vals.size() != m.data().size())
    throw std::runtime_error("checkpoint: matrix value count mismatch");
  m.data() = vals;
  return m;
}

}  // namespace

void save_checkpoint(const GdnParams& params, int degree_k,
                     const std::string& path) {
  check_shapes(params);
  json j{{"format", "gdn-checkpoint-v1"},
         {"d", params.input_dim()},
         {"h_e", params.encoder_dim()},
         {"h_v", params.hidden_dim()},
         {"degree_k", degree_k},
         {"encoder_weight", matrix_to_json(params.encoder_weight)},
         {"encoder_bias", params.encoder_bias},
         {"hidden_weight", matrix_to_json(params.hidden_weight)},
         {"hidden_bias", params.hidden_bias},
         {"output_weight", params.output_weight},
         {"output_bias", params.output_bias}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

std::pair<GdnParams, int> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint: parse error in " + path + ": " +
                             e.what());
  }
  if (j.value("format", "") != "gdn-checkpoint-v1")
    throw std::runtime_error("checkpoint: unrecognized format in " + path);
  GdnParams p;
  p.encoder_weight = matrix_from_json(j.at("encoder_weight"));
  p.encoder_bias = j.at("encoder_bias").get<std::vector<double>>();
  p.hidden_weight = matrix_from_json(j.at("hidden_weight"));
  p.hidden_bias = j.at("hidden_bias").get<std::vector<double>>();
  p.output_weight = j.at("output_weight").get<std::vector<double>>();
  p.output_bias = j.at("output_bias").get<double>();
  check_shapes(p);
  if (p.input_dim() != j.at("d").get<std::size_t>() ||
      p.encoder_dim() != j.at("h_e").get<std::size_t>() ||
      p.hidden_dim() != j.at("h_v").get<std::size_t>())
    throw std::runtime_error("checkpoint: declared dims disagree with shapes");
  return {std::move(p), j.at("degree_k").get<int>()};
}

}  // namespace gdn
