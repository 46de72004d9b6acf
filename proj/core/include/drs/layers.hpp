#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "drs/tape.hpp"

namespace drs {

// Glorot-uniform matrix, zero bias. Vectors are treated as 1 x n matrices.
Tensor glorot_matrix(std::size_t out_dim, std::size_t in_dim, RngState& rng);
Tensor uniform_tensor(std::vector<std::size_t> shape, double range, RngState& rng);

// One GRU transition. Each gate owns a hidden x (input+hidden) matrix over
// concat(x, h_prev) plus a bias; the reset gate rescales h_prev inside the
// candidate preactivation. The update gate carries the previous state:
// h' = z*h_prev + (1-z)*cand.
struct GruCellParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Parameter w_update, b_update;
  Parameter w_reset, b_reset;
  Parameter w_cand, b_cand;

  static GruCellParams init(const std::string& prefix, std::size_t input_dim,
                            std::size_t hidden_dim, RngState& rng);
  void visit(const std::function<void(Parameter&)>& fn);
};

Var gru_step(Tape& t, GruCellParams& cell, Var x, Var h_prev);

struct BiGruResult {
  std::vector<Var> outputs;  // outputs[i] = concat(fwd_i, bwd_i)
  Var last_fwd;              // forward state at the final position
  Var last_bwd;              // backward state at the first position
};

BiGruResult bigru_run(Tape& t, GruCellParams& fwd, GruCellParams& bwd,
                      std::span<const Var> inputs);

// Width-2 convolution with ReLU: out[i] = relu(W*concat(in[i], in[i+1]) + b).
struct ConvWidth2Params {
  Parameter weight;  // out_dim x (2*in_dim)
  Parameter bias;    // out_dim

  static ConvWidth2Params init(const std::string& prefix, std::size_t in_dim,
                               std::size_t out_dim, RngState& rng);
  void visit(const std::function<void(Parameter&)>& fn);
};

std::vector<Var> conv_width2(Tape& t, ConvWidth2Params& p, std::span<const Var> inputs);

enum class Activation { relu, none };

struct MlpParams {
  Parameter weight;  // out_dim x in_dim
  Parameter bias;    // out_dim
  Activation activation = Activation::relu;

  static MlpParams init(const std::string& prefix, std::size_t in_dim, std::size_t out_dim,
                        Activation act, RngState& rng);
  void visit(const std::function<void(Parameter&)>& fn);
};

Var mlp_apply(Tape& t, MlpParams& p, Var x);

struct SoftmaxNllResult {
  double loss = 0.0;
  std::vector<double> probabilities;
};

// Softmax normalization with the gold column's negative log probability.
SoftmaxNllResult softmax_nll(std::span<const double> scores, std::size_t gold_index);

std::size_t argmax(std::span<const double> scores);  // ties -> lowest index

}  // namespace drs
