#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drs/decoder.hpp"
#include "drs/metrics.hpp"

namespace drs {

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 10;
  double learning_rate = 0.001;
  double alpha_split = 0.3;
  double alpha_nuclearity = 1.0;
  double alpha_relation = 1.0;
  double dropout = 0.2;
  double grad_clip_norm = 0.0;  // 0 disables clipping
  std::uint64_t seed = 1;
  std::string checkpoint_dir;  // empty: keep checkpoints in memory only
  std::string log_path;        // empty: no log file
};

struct LossBreakdown {
  double split_loss = 0.0;
  double nuclearity_loss = 0.0;
  double relation_loss = 0.0;
  double total = 0.0;  // alpha-weighted combination
};

struct DocumentLoss {
  Var loss;  // combined tape scalar, ready for backward()
  LossBreakdown values;
  std::vector<double> step_split_losses;  // per decoder step
};

struct LossWeights {
  double alpha_split = 0.3;
  double alpha_nuclearity = 1.0;
  double alpha_relation = 1.0;
};

// Teacher-forced losses over one document. The gold tree must be binary and
// its relation labels must be in the vocabulary.
DocumentLoss document_loss(Tape& t, ModelParams& m, const Document& doc,
                           const Vocabulary& vocab, const LossWeights& weights,
                           const EncodeOptions& opts);

// Free-running parse. Single-EDU documents yield a leaf-only tree.
DiscourseTree parse_document(ModelParams& m, const Document& doc, const Vocabulary& vocab);

// Full micro/macro scores of free-running parses against the gold trees.
EvalReport evaluate_corpus(ModelParams& m, std::span<const Document> docs,
                           const Vocabulary& vocab);

struct TrainResult {
  double best_dev_full_micro = -1.0;
  std::size_t best_epoch = 0;
  std::vector<std::string> log_lines;  // JSON lines, one per batch plus one per epoch
  std::string best_checkpoint_path;    // set when checkpoint_dir is configured
  std::string final_checkpoint_path;
};

// Seeded shuffling, gradient accumulation over each batch of documents, one
// Adam step per batch, dev evaluation after every epoch with best-checkpoint
// retention. Deterministic to the byte for a fixed config.
TrainResult train(ModelParams& m, std::span<const Document> train_docs,
                  std::span<const Document> dev_docs, const Vocabulary& vocab,
                  const TrainConfig& cfg);

}  // namespace drs
