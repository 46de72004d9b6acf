#pragma once

#include <span>
#include <vector>

#include "drs/model.hpp"
#include "drs/tape.hpp"

namespace drs {

struct EncodeOptions {
  bool train = false;
  double dropout = 0.0;
  RngState* rng = nullptr;  // required when train && dropout > 0
};

struct EncodedDocument {
  std::vector<Var> edu_vecs;    // h_e, one per EDU
  std::vector<Var> ctx_vecs;    // h'_e after the EDU-sequence BiGRU
  std::vector<Var> split_vecs;  // h_s, N+1 entries; 0 and N are stub outputs
};

// Per-EDU encoding: word+POS embeddings through a BiGRU, then the
// concatenated final states plus an attention-weighted sum of the word
// outputs. Out-of-vocabulary tokens map to <unk>. The attention weights can
// be captured for inspection.
Var encode_edu(Tape& t, ModelParams& m, const Vocabulary& vocab,
               std::span<const std::pair<std::string, std::string>> edu,
               const EncodeOptions& opts, std::vector<double>* attention_out = nullptr);

// Whole-document pass: EDU vectors, contextual vectors, then zero stubs on
// both ends and the width-2 convolution producing N+1 split-point vectors.
EncodedDocument encode_document(Tape& t, ModelParams& m, const Document& doc,
                                const Vocabulary& vocab, const EncodeOptions& opts);

}  // namespace drs
