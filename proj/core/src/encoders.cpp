#include "drs/encoders.hpp"

#include <stdexcept>

namespace drs {

namespace {

Var maybe_dropout(Tape& t, Var v, const EncodeOptions& opts) {
  if (!opts.train || opts.dropout == 0.0) return v;
  if (!opts.rng) throw std::runtime_error("dropout requires an RngState in training mode");
  return t.dropout(v, opts.dropout, *opts.rng);
}

}  // namespace

Var encode_edu(Tape& t, ModelParams& m, const Vocabulary& vocab,
               std::span<const std::pair<std::string, std::string>> edu,
               const EncodeOptions& opts, std::vector<double>* attention_out) {
  if (edu.empty()) throw std::runtime_error("encode_edu: empty EDU");

  std::vector<Var> inputs(edu.size());
  for (std::size_t i = 0; i < edu.size(); ++i) {
    Var w = t.embedding_row(m.word_emb.table, vocab.token_id(edu[i].first));
    Var p = t.embedding_row(m.pos_emb.table, vocab.pos_id(edu[i].second));
    inputs[i] = maybe_dropout(t, t.concat(w, p), opts);
  }

  BiGruResult gru = bigru_run(t, m.edu_fwd, m.edu_bwd, inputs);

  Var q = t.param(m.attn_q);
  std::vector<Var> logits(edu.size());
  for (std::size_t i = 0; i < edu.size(); ++i) logits[i] = t.dot(q, gru.outputs[i]);
  Var logit_vec = t.stack(logits);
  Var weights = m.dims.literal_attention ? t.div_by(logit_vec, t.sum(logit_vec))
                                         : t.softmax(logit_vec);
  if (attention_out) {
    const auto& wv = t.value(weights).values;
    attention_out->assign(wv.begin(), wv.end());
  }

  Var pooled = t.scale(gru.outputs[0], t.pick(weights, 0));
  for (std::size_t i = 1; i < edu.size(); ++i) {
    pooled = t.add(pooled, t.scale(gru.outputs[i], t.pick(weights, i)));
  }
  return t.add(t.concat(gru.last_fwd, gru.last_bwd), pooled);
}

EncodedDocument encode_document(Tape& t, ModelParams& m, const Document& doc,
                                const Vocabulary& vocab, const EncodeOptions& opts) {
  const std::size_t n = doc.n_edus();
  if (n < 2) {
    throw std::runtime_error("encode_document: document '" + doc.doc_id + "' has " +
                             std::to_string(n) + " EDUs; need at least 2 for a split point");
  }

  EncodedDocument enc;
  enc.edu_vecs.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    Var h = encode_edu(t, m, vocab, doc.edus[k], opts);
    enc.edu_vecs[k] = h;
  }

  std::vector<Var> seq_inputs(n);
  for (std::size_t k = 0; k < n; ++k) seq_inputs[k] = maybe_dropout(t, enc.edu_vecs[k], opts);
  BiGruResult seq = bigru_run(t, m.seq_fwd, m.seq_bwd, seq_inputs);
  enc.ctx_vecs = seq.outputs;

  // zero stubs on both ends, then the width-2 convolution
  std::vector<Var> padded;
  padded.reserve(n + 2);
  padded.push_back(t.leaf(Tensor::zeros({m.dims.ctx_vec_width()})));
  for (Var v : enc.ctx_vecs) padded.push_back(v);
  padded.push_back(t.leaf(Tensor::zeros({m.dims.ctx_vec_width()})));
  enc.split_vecs = conv_width2(t, m.conv, padded);

  for (Var v : enc.split_vecs) {
    if (!t.value(v).all_finite()) {
      throw std::runtime_error("encode_document: non-finite split vector for doc '" +
                               doc.doc_id + "'");
    }
  }
  return enc;
}

}  // namespace drs
