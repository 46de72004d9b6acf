#include "drs/training.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "drs/adam.hpp"

namespace drs {

using nlohmann::json;

DocumentLoss document_loss(Tape& t, ModelParams& m, const Document& doc,
                           const Vocabulary& vocab, const LossWeights& weights,
                           const EncodeOptions& opts) {
  if (!doc.gold_tree) {
    throw std::runtime_error("document_loss: doc '" + doc.doc_id + "' has no gold tree");
  }
  if (!doc.gold_tree->is_binary()) {
    throw std::runtime_error("document_loss: doc '" + doc.doc_id +
                             "' has a non-binary gold tree; binarize first");
  }
  const std::vector<SplitDecision> oracle = tree_to_decisions(*doc.gold_tree);

  EncodedDocument enc = encode_document(t, m, doc, vocab, opts);
  DecodeResult dec = decode_document(t, m, enc, vocab.relations, opts, &oracle);

  DocumentLoss out;
  Var ls, ln, lr;
  for (std::size_t i = 0; i < dec.steps.size(); ++i) {
    const DecodeStep& step = dec.steps[i];
    Var step_ls = t.nll(step.split_scores, step.chosen_candidate);
    Var step_ln = t.nll(step.nuc_scores, static_cast<std::size_t>(oracle[i].nuclearity));
    Var step_lr = t.nll(step.rel_scores, vocab.relation_id(oracle[i].relation));
    out.step_split_losses.push_back(t.scalar_value(step_ls));
    ls = i == 0 ? step_ls : t.add(ls, step_ls);
    ln = i == 0 ? step_ln : t.add(ln, step_ln);
    lr = i == 0 ? step_lr : t.add(lr, step_lr);
  }
  out.loss = t.add(t.add(t.cmul(ls, weights.alpha_split), t.cmul(ln, weights.alpha_nuclearity)),
                   t.cmul(lr, weights.alpha_relation));
  out.values.split_loss = t.scalar_value(ls);
  out.values.nuclearity_loss = t.scalar_value(ln);
  out.values.relation_loss = t.scalar_value(lr);
  out.values.total = t.scalar_value(out.loss);
  return out;
}

DiscourseTree parse_document(ModelParams& m, const Document& doc, const Vocabulary& vocab) {
  if (doc.n_edus() == 0) {
    throw std::runtime_error("parse_document: doc '" + doc.doc_id + "' has no EDUs");
  }
  if (doc.n_edus() == 1) return DiscourseTree(leaf_node(0));
  Tape t;
  EncodeOptions opts;  // inference: no dropout
  EncodedDocument enc = encode_document(t, m, doc, vocab, opts);
  DecodeResult dec = decode_document(t, m, enc, vocab.relations, opts);
  return decisions_to_tree(dec.decisions, doc.n_edus());
}

EvalReport evaluate_corpus(ModelParams& m, std::span<const Document> docs,
                           const Vocabulary& vocab) {
  std::vector<TreeEval> evals;
  evals.reserve(docs.size());
  for (const Document& doc : docs) {
    if (!doc.gold_tree) {
      throw std::runtime_error("evaluate_corpus: doc '" + doc.doc_id + "' has no gold tree");
    }
    const DiscourseTree gold = doc.gold_tree->is_binary() ? doc.gold_tree->clone()
                                                          : binarize_right(*doc.gold_tree);
    evals.push_back(parseval(parse_document(m, doc, vocab), gold));
  }
  return aggregate_report(evals);
}

namespace {

// values-only snapshot for best-checkpoint retention
std::vector<std::vector<double>> snapshot(ModelParams& m) {
  std::vector<std::vector<double>> out;
  m.visit([&](Parameter& p) { out.push_back(p.value.values); });
  return out;
}

void restore(ModelParams& m, const std::vector<std::vector<double>>& snap) {
  std::size_t i = 0;
  m.visit([&](Parameter& p) { p.value.values = snap[i++]; });
}

}  // namespace

TrainResult train(ModelParams& m, std::span<const Document> train_docs,
                  std::span<const Document> dev_docs, const Vocabulary& vocab,
                  const TrainConfig& cfg) {
  if (train_docs.empty()) throw std::runtime_error("train: empty training corpus");
  if (cfg.epochs == 0) throw std::runtime_error("train: epochs must be at least 1");
  if (cfg.batch_size == 0) throw std::runtime_error("train: batch_size must be positive");

  // binarized working copies; single-EDU documents carry no decisions
  std::vector<Document> docs;
  for (const Document& d : train_docs) {
    if (!d.gold_tree) {
      throw std::runtime_error("train: doc '" + d.doc_id + "' has no gold tree");
    }
    if (d.n_edus() < 2) continue;
    Document copy = d.copy();
    if (!copy.gold_tree->is_binary()) copy.gold_tree = binarize_right(*copy.gold_tree);
    docs.push_back(std::move(copy));
  }
  if (docs.empty()) throw std::runtime_error("train: no trainable documents (all single-EDU)");

  const LossWeights weights{cfg.alpha_split, cfg.alpha_nuclearity, cfg.alpha_relation};
  Adam optimizer(
      {cfg.learning_rate, 0.9, 0.999, 1e-8, cfg.grad_clip_norm});
  std::vector<Parameter*> blocks = m.trainable_blocks();
  RngState rng(cfg.seed);

  TrainResult result;
  std::vector<std::vector<double>> best_snapshot;

  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {  // Fisher-Yates
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    std::size_t batch_idx = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_idx) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (Parameter* p : blocks) p->zero_grad();
      LossBreakdown batch;
      for (std::size_t i = start; i < end; ++i) {
        const Document& doc = docs[order[i]];
        Tape t;
        EncodeOptions opts{true, cfg.dropout, &rng};
        DocumentLoss dl = document_loss(t, m, doc, vocab, weights, opts);
        if (!std::isfinite(dl.values.total)) {
          throw std::runtime_error("train: non-finite loss on doc '" + doc.doc_id + "'");
        }
        t.backward(dl.loss);
        batch.split_loss += dl.values.split_loss;
        batch.nuclearity_loss += dl.values.nuclearity_loss;
        batch.relation_loss += dl.values.relation_loss;
        batch.total += dl.values.total;
      }
      optimizer.step(blocks);
      result.log_lines.push_back(json{{"epoch", epoch},
                                      {"batch", batch_idx},
                                      {"docs", end - start},
                                      {"ls", batch.split_loss},
                                      {"ln", batch.nuclearity_loss},
                                      {"lr", batch.relation_loss},
                                      {"l", batch.total}}
                                     .dump());
    }

    if (!dev_docs.empty()) {
      const EvalReport dev = evaluate_corpus(m, dev_docs, vocab);
      const bool is_best = dev.micro.full > result.best_dev_full_micro;
      if (is_best) {
        result.best_dev_full_micro = dev.micro.full;
        result.best_epoch = epoch;
        best_snapshot = snapshot(m);
      }
      result.log_lines.push_back(json{{"epoch", epoch},
                                      {"dev_full_micro", dev.micro.full},
                                      {"dev_bare_micro", dev.micro.bare},
                                      {"best", is_best}}
                                     .dump());
    }
  }

  if (!cfg.checkpoint_dir.empty()) {
    std::filesystem::create_directories(cfg.checkpoint_dir);
    result.final_checkpoint_path = cfg.checkpoint_dir + "/final.json";
    save_checkpoint(result.final_checkpoint_path, m, vocab);
    if (!best_snapshot.empty()) {
      std::vector<std::vector<double>> final_values = snapshot(m);
      restore(m, best_snapshot);
      result.best_checkpoint_path = cfg.checkpoint_dir + "/best.json";
      save_checkpoint(result.best_checkpoint_path, m, vocab);
      restore(m, final_values);
    }
  }

  if (!cfg.log_path.empty()) {
    if (const auto dir = std::filesystem::path(cfg.log_path).parent_path(); !dir.empty()) {
      std::filesystem::create_directories(dir);
    }
    std::ofstream log(cfg.log_path);
    if (!log) throw std::runtime_error("train: cannot write log file: " + cfg.log_path);
    for (const auto& line : result.log_lines) log << line << "\n";
  }
  return result;
}

}  // namespace drs
