#pragma once

#include <functional>
#include <string>
#include <vector>

#include "drs/corpus.hpp"
#include "drs/layers.hpp"

namespace drs {

// All widths are per direction for the bidirectional encoders; their outputs
// are twice as wide.
struct ModelDims {
  std::size_t word_dim = 300;
  std::size_t pos_dim = 30;
  std::size_t edu_gru_hidden = 256;    // word-level BiGRU inside each EDU
  std::size_t seq_gru_hidden = 256;    // BiGRU over the EDU sequence
  std::size_t split_gru_hidden = 256;  // BiGRU over the split-point sequence
  std::size_t decoder_hidden = 512;
  std::size_t split_mlp = 64;
  std::size_t nuc_mlp = 64;
  std::size_t rel_mlp = 64;
  std::size_t n_relations = 18;
  bool literal_attention = false;  // raw-ratio attention weights instead of softmax

  std::size_t edu_vec_width() const { return 2 * edu_gru_hidden; }
  std::size_t ctx_vec_width() const { return 2 * seq_gru_hidden; }
  std::size_t split_vec_width() const { return ctx_vec_width(); }  // conv output
  std::size_t split_enc_width() const { return 2 * split_gru_hidden; }

  // "en" and "zh" carry the published defaults; "tiny" keeps every hidden
  // width at 8 or below for fast exact verification.
  static ModelDims profile(const std::string& name);
};

// Biaffine scorer: two one-layer ReLU projections followed by a bilinear
// form plus two linear terms and a bias, producing k class scores.
struct BiaffineHead {
  MlpParams enc_mlp;  // split-point side
  MlpParams dec_mlp;  // decoder-state side
  Parameter w;        // m x k x n
  Parameter u;        // k x m
  Parameter v;        // k x n
  Parameter b;        // k

  std::size_t k() const { return b.value.numel(); }

  static BiaffineHead init(const std::string& prefix, std::size_t enc_width,
                           std::size_t dec_width, std::size_t mlp_width, std::size_t k,
                           RngState& rng);
  void visit(const std::function<void(Parameter&)>& fn);
};

struct ModelParams {
  ModelDims dims;

  EmbeddingTable word_emb;  // frozen
  EmbeddingTable pos_emb;   // trainable
  GruCellParams edu_fwd, edu_bwd;
  Parameter attn_q;
  GruCellParams seq_fwd, seq_bwd;
  ConvWidth2Params conv;
  GruCellParams split_fwd, split_bwd;
  MlpParams dec_init;  // linear map from the split encoder's final states
  GruCellParams dec_cell;
  BiaffineHead split_head, nuc_head, rel_head;

  static ModelParams init(const ModelDims& dims, const Vocabulary& vocab,
                          EmbeddingTable word_embeddings, RngState& rng);

  void visit(const std::function<void(Parameter&)>& fn);  // every block, frozen included
  void visit(const std::function<void(const Parameter&)>& fn) const;
  std::vector<Parameter*> all_blocks();
  std::vector<Parameter*> trainable_blocks();
};

// Versioned JSON checkpoint holding dims, vocabulary and every parameter
// block. Doubles round-trip exactly, so a loaded model reproduces identical
// inference outputs.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const Vocabulary& vocab);

struct Checkpoint {
  ModelDims dims;
  Vocabulary vocab;
  ModelParams params;
};

Checkpoint load_checkpoint(const std::string& path);

// Loads blocks into an existing model, verifying every shape; throws naming
// the first mismatching block.
void load_checkpoint_into(const std::string& path, ModelParams& params, Vocabulary& vocab);

}  // namespace drs
