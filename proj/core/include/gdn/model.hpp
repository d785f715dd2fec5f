#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gdn/graph.hpp"
#include "gdn/matrix.hpp"
#include "gdn/rng.hpp"

namespace gdn {

// Scoring network: linear encoder over propagated features, then a
// two-layer valuator (ReLU hidden layer, scalar head).
struct GdnParams {
  Matrix encoder_weight;             // d x h_e
  std::vector<double> encoder_bias;  // h_e
  Matrix hidden_weight;              // h_e x h_v
  std::vector<double> hidden_bias;   // h_v
  std::vector<double> output_weight; // h_v
  double output_bias = 0.0;

  std::size_t input_dim() const { return encoder_weight.rows(); }
  std::size_t encoder_dim() const { return encoder_weight.cols(); }
  std::size_t hidden_dim() const { return hidden_weight.cols(); }
  bool all_finite() const;
};

struct GdnGradients {
  Matrix encoder_weight;
  std::vector<double> encoder_bias;
  Matrix hidden_weight;
  std::vector<double> hidden_bias;
  std::vector<double> output_weight;
  double output_bias = 0.0;
};

struct ScoreBatch {
  std::vector<NodeId> node_indices;
  std::vector<double> scores;
};

// Weights uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer, biases
// zero. Draw order: encoder weights row-major, hidden weights row-major,
// output weights.
GdnParams init_params(std::size_t d, std::size_t h_e, std::size_t h_v,
                      Rng& rng);

// s_i = relu(x_i W_e + b_e) ... precisely: z = x W_e + b_e (linear, no
// nonlinearity), o = relu(z W_h + b_h), s = o . w_out + b_out.
ScoreBatch forward(const GdnParams& params, const PropagatedFeatures& feats,
                   const std::vector<NodeId>& batch);

// Exact gradients of sum_i dloss_dscore[i] * s_i. ReLU subgradient at 0
// is 0.
GdnGradients backward(const GdnParams& params, const PropagatedFeatures& feats,
                      const std::vector<NodeId>& batch,
                      const std::vector<double>& dloss_dscore);

// Returns params - lr * grads; inputs untouched.
GdnParams apply_gradient_step(const GdnParams& params,
                              const GdnGradients& grads, double lr);

// In-place accumulate: into += from. Shapes must agree.
void accumulate(GdnGradients& into, const GdnGradients& from);

// JSON checkpoint with bit-exact value round-trip; records the propagation
// degree K alongside the parameters.
void save_checkpoint(const GdnParams& params, int degree_k,
                     const std::string& path);
std::pair<GdnParams, int> load_checkpoint(const std::string& path);

}  // namespace gdn
