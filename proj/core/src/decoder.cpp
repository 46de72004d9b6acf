#include "drs/decoder.hpp"

#include <stdexcept>

namespace drs {

namespace {

Var maybe_dropout(Tape& t, Var v, const EncodeOptions& opts) {
  if (!opts.train || opts.dropout == 0.0) return v;
  if (!opts.rng) throw std::runtime_error("dropout requires an RngState in training mode");
  return t.dropout(v, opts.dropout, *opts.rng);
}

void check_labels(const ModelParams& m, const std::vector<std::string>& relation_labels) {
  if (relation_labels.size() != m.rel_head.k()) {
    throw std::runtime_error("decoder: " + std::to_string(relation_labels.size()) +
                             " relation labels for a head with k=" +
                             std::to_string(m.rel_head.k()));
  }
}

// One decoder step over span (l, r): advance the GRU, score candidates,
// pick the split (gold under teacher forcing) and classify its labels.
DecodeStep run_step(Tape& t, ModelParams& m, const SplitEncoding& splits, Var& state,
                    std::size_t l, std::size_t r, const EncodeOptions& opts,
                    const SplitDecision* oracle) {
  state = gru_step(t, m.dec_cell, t.concat(splits.h_se[l], splits.h_se[r]), state);

  const std::size_t n_cand = r - l - 1;
  std::vector<Var> cand_scores(n_cand);
  for (std::size_t c = 0; c < n_cand; ++c) {
    Var s = biaffine_score(t, m.split_head, splits.h_se[l + 1 + c], state, opts);
    cand_scores[c] = t.pick(s, 0);
  }

  DecodeStep step;
  step.left = l;
  step.right = r;
  step.split_scores = t.stack(cand_scores);
  if (oracle) {
    if (oracle->left_boundary != l || oracle->right_boundary != r) {
      throw std::logic_error("decode: oracle decision covers span (" +
                             std::to_string(oracle->left_boundary) + ", " +
                             std::to_string(oracle->right_boundary) + "), decoder is at (" +
                             std::to_string(l) + ", " + std::to_string(r) + ")");
    }
    if (oracle->split <= l || oracle->split >= r) {
      throw std::logic_error("decode: oracle split " + std::to_string(oracle->split) +
                             " outside span (" + std::to_string(l) + ", " + std::to_string(r) +
                             ")");
    }
    step.chosen_candidate = oracle->split - l - 1;
  } else {
    step.chosen_candidate = argmax(t.value(step.split_scores).values);
  }
  step.split = l + 1 + step.chosen_candidate;

  step.nuc_scores = biaffine_score(t, m.nuc_head, splits.h_se[step.split], state, opts);
  step.rel_scores = biaffine_score(t, m.rel_head, splits.h_se[step.split], state, opts);
  if (oracle) {
    step.nuc_choice = static_cast<std::size_t>(oracle->nuclearity);
  } else {
    step.nuc_choice = argmax(t.value(step.nuc_scores).values);
  }
  step.rel_choice = argmax(t.value(step.rel_scores).values);
  return step;
}

SplitDecision step_to_decision(const DecodeStep& step,
                               const std::vector<std::string>& relation_labels,
                               const SplitDecision* oracle) {
  SplitDecision d;
  d.left_boundary = step.left;
  d.right_boundary = step.right;
  d.split = step.split;
  if (oracle) {
    d.nuclearity = oracle->nuclearity;
    d.relation = oracle->relation;
  } else {
    d.nuclearity = static_cast<Nuclearity>(step.nuc_choice);
    d.relation = relation_labels[step.rel_choice];
  }
  return d;
}

DecodeResult decode_recursive(Tape& t, ModelParams& m, const SplitEncoding& splits,
                              std::size_t n_edus,
                              const std::vector<std::string>& relation_labels,
                              const EncodeOptions& opts) {
  DecodeResult out;
  Var state = splits.init_state;
  const std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t l, std::size_t r) {
    DecodeStep step = run_step(t, m, splits, state, l, r, opts, nullptr);
    out.decisions.push_back(step_to_decision(step, relation_labels, nullptr));
    const std::size_t split = step.split;
    out.steps.push_back(std::move(step));
    if (split - l >= 2) rec(l, split);
    if (r - split >= 2) rec(split, r);
  };
  rec(0, n_edus);
  return out;
}

}  // namespace

SplitEncoding encode_splits(Tape& t, ModelParams& m, std::span<const Var> h_s) {
  if (h_s.size() < 3) {
    throw std::runtime_error("encode_splits: need at least 3 split vectors, got " +
                             std::to_string(h_s.size()));
  }
  BiGruResult gru = bigru_run(t, m.split_fwd, m.split_bwd, h_s);
  SplitEncoding out;
  out.h_se = std::move(gru.outputs);
  out.init_state = mlp_apply(t, m.dec_init, t.concat(gru.last_fwd, gru.last_bwd));
  return out;
}

Var biaffine_score(Tape& t, BiaffineHead& head, Var h_se_i, Var h_d_j,
                   const EncodeOptions& opts) {
  Var enc_proj = mlp_apply(t, head.enc_mlp, maybe_dropout(t, h_se_i, opts));
  Var dec_proj = mlp_apply(t, head.dec_mlp, maybe_dropout(t, h_d_j, opts));
  Var score = t.bilinear(t.param(head.w), enc_proj, dec_proj);
  score = t.add(score, t.matvec(t.param(head.u), enc_proj));
  score = t.add(score, t.matvec(t.param(head.v), dec_proj));
  return t.add(score, t.param(head.b));
}

DecodeResult decode_over_splits(Tape& t, ModelParams& m, const SplitEncoding& splits,
                                std::size_t n_edus,
                                const std::vector<std::string>& relation_labels,
                                const EncodeOptions& opts,
                                const std::vector<SplitDecision>* oracle) {
  check_labels(m, relation_labels);
  if (n_edus < 2) throw std::runtime_error("decode: need at least 2 EDUs");
  if (splits.h_se.size() != n_edus + 1) {
    throw std::runtime_error("decode: " + std::to_string(splits.h_se.size()) +
                             " split encodings for " + std::to_string(n_edus) + " EDUs");
  }

  DecodeResult out;
  Var state = splits.init_state;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, n_edus}};
  while (!stack.empty()) {
    const auto [l, r] = stack.back();
    stack.pop_back();
    const SplitDecision* gold = nullptr;
    if (oracle) {
      if (out.decisions.size() >= oracle->size()) {
        throw std::logic_error("decode: oracle exhausted before the stack emptied");
      }
      gold = &(*oracle)[out.decisions.size()];
    }
    DecodeStep step = run_step(t, m, splits, state, l, r, opts, gold);
    out.decisions.push_back(step_to_decision(step, relation_labels, gold));
    const std::size_t split = step.split;
    out.steps.push_back(std::move(step));
    // right child first so the left span is popped next
    if (r - split >= 2) stack.emplace_back(split, r);
    if (split - l >= 2) stack.emplace_back(l, split);
  }
  if (out.decisions.size() != n_edus - 1) {
    throw std::logic_error("decode: emitted " + std::to_string(out.decisions.size()) +
                           " decisions for " + std::to_string(n_edus) + " EDUs");
  }
  return out;
}

DecodeResult decode_document(Tape& t, ModelParams& m, const EncodedDocument& enc,
                             const std::vector<std::string>& relation_labels,
                             const EncodeOptions& opts,
                             const std::vector<SplitDecision>* oracle) {
  SplitEncoding splits = encode_splits(t, m, enc.split_vecs);
  return decode_over_splits(t, m, splits, enc.split_vecs.size() - 1, relation_labels, opts,
                            oracle);
}

DecodeResult decode_reference_over_splits(Tape& t, ModelParams& m, const SplitEncoding& splits,
                                          std::size_t n_edus,
                                          const std::vector<std::string>& relation_labels,
                                          const EncodeOptions& opts) {
  check_labels(m, relation_labels);
  if (n_edus < 2) throw std::runtime_error("decode: need at least 2 EDUs");
  return decode_recursive(t, m, splits, n_edus, relation_labels, opts);
}

DecodeResult decode_reference(Tape& t, ModelParams& m, const EncodedDocument& enc,
                              const std::vector<std::string>& relation_labels,
                              const EncodeOptions& opts) {
  SplitEncoding splits = encode_splits(t, m, enc.split_vecs);
  return decode_reference_over_splits(t, m, splits, enc.split_vecs.size() - 1, relation_labels,
                                      opts);
}

}  // namespace drs
