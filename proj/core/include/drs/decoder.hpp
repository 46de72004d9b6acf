#pragma once

#include <optional>
#include <span>
#include <vector>

#include "drs/encoders.hpp"
#include "drs/model.hpp"
#include "drs/tree.hpp"

namespace drs {

struct SplitEncoding {
  std::vector<Var> h_se;  // same length as the split-vector input
  Var init_state;         // projected combination of the final BiGRU states
};

// BiGRU over the split-point vectors; the concatenated final states map
// through a learned linear layer to the decoder width.
SplitEncoding encode_splits(Tape& t, ModelParams& m, std::span<const Var> h_s);

// MLP projections of both sides followed by the bilinear + linear + bias
// form; returns the k-vector of class scores.
Var biaffine_score(Tape& t, BiaffineHead& head, Var h_se_i, Var h_d_j,
                   const EncodeOptions& opts);

struct DecodeStep {
  std::size_t left = 0, right = 0, split = 0;
  Var split_scores;                 // one score per interior candidate of (left, right)
  std::size_t chosen_candidate = 0; // index into the candidate list
  Var nuc_scores;                   // k=3, scored at the chosen split
  Var rel_scores;                   // k=n_relations
  std::size_t nuc_choice = 0;
  std::size_t rel_choice = 0;
};

struct DecodeResult {
  std::vector<SplitDecision> decisions;
  std::vector<DecodeStep> steps;
};

// Stack-driven decoding. The stack starts with the whole-document span
// (0, N); each step pops a span, advances the decoder GRU on the
// concatenated boundary encodings, scores the strict-interior candidates and
// selects the argmax (ties to the lowest index). Child spans that still
// contain a candidate are pushed right first, then left, so the left span is
// processed next. With an oracle the gold decisions drive the stack
// (teacher forcing) and per-step score vectors are recorded for the loss.
DecodeResult decode_document(Tape& t, ModelParams& m, const EncodedDocument& enc,
                             const std::vector<std::string>& relation_labels,
                             const EncodeOptions& opts,
                             const std::vector<SplitDecision>* oracle = nullptr);

// Same contract on an already-computed split encoding; lets tests drive the
// decoder with constructed split-point vectors.
DecodeResult decode_over_splits(Tape& t, ModelParams& m, const SplitEncoding& splits,
                                std::size_t n_edus,
                                const std::vector<std::string>& relation_labels,
                                const EncodeOptions& opts,
                                const std::vector<SplitDecision>* oracle = nullptr);

// Recursive re-implementation of inference-mode decoding, used as an
// equivalence oracle for the stack machine. The decoder state threads
// through the recursion in emission order.
DecodeResult decode_reference(Tape& t, ModelParams& m, const EncodedDocument& enc,
                              const std::vector<std::string>& relation_labels,
                              const EncodeOptions& opts);

DecodeResult decode_reference_over_splits(Tape& t, ModelParams& m, const SplitEncoding& splits,
                                          std::size_t n_edus,
                                          const std::vector<std::string>& relation_labels,
                                          const EncodeOptions& opts);

}  // namespace drs
