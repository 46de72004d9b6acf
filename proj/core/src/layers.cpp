#include "drs/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drs {

Tensor glorot_matrix(std::size_t out_dim, std::size_t in_dim, RngState& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  Tensor t = Tensor::zeros({out_dim, in_dim});
  for (auto& v : t.values) v = rng.uniform(-r, r);
  return t;
}

Tensor uniform_tensor(std::vector<std::size_t> shape, double range, RngState& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.values) v = rng.uniform(-range, range);
  return t;
}

GruCellParams GruCellParams::init(const std::string& prefix, std::size_t input_dim,
                                  std::size_t hidden_dim, RngState& rng) {
  GruCellParams c;
  c.input_dim = input_dim;
  c.hidden_dim = hidden_dim;
  const std::size_t cols = input_dim + hidden_dim;
  c.w_update = Parameter(prefix + ".w_update", glorot_matrix(hidden_dim, cols, rng));
  c.b_update = Parameter(prefix + ".b_update", Tensor::zeros({hidden_dim}));
  c.w_reset = Parameter(prefix + ".w_reset", glorot_matrix(hidden_dim, cols, rng));
  c.b_reset = Parameter(prefix + ".b_reset", Tensor::zeros({hidden_dim}));
  c.w_cand = Parameter(prefix + ".w_cand", glorot_matrix(hidden_dim, cols, rng));
  c.b_cand = Parameter(prefix + ".b_cand", Tensor::zeros({hidden_dim}));
  return c;
}

void GruCellParams::visit(const std::function<void(Parameter&)>& fn) {
  fn(w_update);
  fn(b_update);
  fn(w_reset);
  fn(b_reset);
  fn(w_cand);
  fn(b_cand);
}

Var gru_step(Tape& t, GruCellParams& cell, Var x, Var h_prev) {
  if (t.value(x).numel() != cell.input_dim) {
    throw std::runtime_error("gru_step: operand x has shape " + shape_str(t.value(x).shape) +
                             ", expected (" + std::to_string(cell.input_dim) + ")");
  }
  if (t.value(h_prev).numel() != cell.hidden_dim) {
    throw std::runtime_error("gru_step: operand h_prev has shape " +
                             shape_str(t.value(h_prev).shape) + ", expected (" +
                             std::to_string(cell.hidden_dim) + ")");
  }
  Var xh = t.concat(x, h_prev);
  Var z = t.sigmoid(t.add(t.matvec(t.param(cell.w_update), xh), t.param(cell.b_update)));
  Var r = t.sigmoid(t.add(t.matvec(t.param(cell.w_reset), xh), t.param(cell.b_reset)));
  Var xrh = t.concat(x, t.mul(r, h_prev));
  Var cand = t.tanh_(t.add(t.matvec(t.param(cell.w_cand), xrh), t.param(cell.b_cand)));
  return t.add(t.mul(z, h_prev), t.mul(t.caffine(z, -1.0, 1.0), cand));
}

BiGruResult bigru_run(Tape& t, GruCellParams& fwd, GruCellParams& bwd,
                      std::span<const Var> inputs) {
  if (inputs.empty()) throw std::runtime_error("bigru_run: empty input sequence");
  const std::size_t n = inputs.size();
  std::vector<Var> fwd_states(n), bwd_states(n);
  Var h = t.leaf(Tensor::zeros({fwd.hidden_dim}));
  for (std::size_t i = 0; i < n; ++i) {
    h = gru_step(t, fwd, inputs[i], h);
    fwd_states[i] = h;
  }
  h = t.leaf(Tensor::zeros({bwd.hidden_dim}));
  for (std::size_t i = n; i-- > 0;) {
    h = gru_step(t, bwd, inputs[i], h);
    bwd_states[i] = h;
  }
  BiGruResult out;
  out.outputs.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.outputs[i] = t.concat(fwd_states[i], bwd_states[i]);
  out.last_fwd = fwd_states[n - 1];
  out.last_bwd = bwd_states[0];
  return out;
}

ConvWidth2Params ConvWidth2Params::init(const std::string& prefix, std::size_t in_dim,
                                        std::size_t out_dim, RngState& rng) {
  ConvWidth2Params p;
  p.weight = Parameter(prefix + ".weight", glorot_matrix(out_dim, 2 * in_dim, rng));
  p.bias = Parameter(prefix + ".bias", Tensor::zeros({out_dim}));
  return p;
}

void ConvWidth2Params::visit(const std::function<void(Parameter&)>& fn) {
  fn(weight);
  fn(bias);
}

std::vector<Var> conv_width2(Tape& t, ConvWidth2Params& p, std::span<const Var> inputs) {
  if (inputs.size() < 2) {
    throw std::runtime_error("conv_width2: need at least 2 inputs, got " +
                             std::to_string(inputs.size()));
  }
  std::vector<Var> out(inputs.size() - 1);
  for (std::size_t i = 0; i + 1 < inputs.size(); ++i) {
    Var window = t.concat(inputs[i], inputs[i + 1]);
    out[i] = t.relu(t.add(t.matvec(t.param(p.weight), window), t.param(p.bias)));
  }
  return out;
}

MlpParams MlpParams::init(const std::string& prefix, std::size_t in_dim, std::size_t out_dim,
                          Activation act, RngState& rng) {
  MlpParams p;
  p.weight = Parameter(prefix + ".weight", glorot_matrix(out_dim, in_dim, rng));
  p.bias = Parameter(prefix + ".bias", Tensor::zeros({out_dim}));
  p.activation = act;
  return p;
}

void MlpParams::visit(const std::function<void(Parameter&)>& fn) {
  fn(weight);
  fn(bias);
}

Var mlp_apply(Tape& t, MlpParams& p, Var x) {
  if (t.value(x).numel() != p.weight.value.shape[1]) {
    throw std::runtime_error("mlp_apply: operand x has shape " + shape_str(t.value(x).shape) +
                             ", expected (" + std::to_string(p.weight.value.shape[1]) + ")");
  }
  Var y = t.add(t.matvec(t.param(p.weight), x), t.param(p.bias));
  return p.activation == Activation::relu ? t.relu(y) : y;
}

SoftmaxNllResult softmax_nll(std::span<const double> scores, std::size_t gold_index) {
  if (scores.empty()) throw std::runtime_error("softmax_nll: empty score vector");
  if (gold_index >= scores.size()) {
    throw std::runtime_error("softmax_nll: gold index " + std::to_string(gold_index) +
                             " out of range for " + std::to_string(scores.size()) + " scores");
  }
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  SoftmaxNllResult r;
  r.probabilities.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    r.probabilities[i] = std::exp(scores[i] - mx);
    z += r.probabilities[i];
  }
  for (auto& p : r.probabilities) p /= z;
  r.loss = -(scores[gold_index] - mx - std::log(z));
  return r;
}

std::size_t argmax(std::span<const double> scores) {
  if (scores.empty()) throw std::runtime_error("argmax: empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

}  // namespace drs
