#include "drs/model.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace drs {

using nlohmann::json;

ModelDims ModelDims::profile(const std::string& name) {
  ModelDims d;
  if (name == "en") {
    // defaults above
  } else if (name == "zh") {
    d.nuc_mlp = 32;
    d.rel_mlp = 128;
    d.n_relations = 16;
  } else if (name == "tiny") {
    d.word_dim = 8;
    d.pos_dim = 4;
    d.edu_gru_hidden = 4;
    d.seq_gru_hidden = 4;
    d.split_gru_hidden = 4;
    d.decoder_hidden = 8;
    d.split_mlp = 8;
    d.nuc_mlp = 8;
    d.rel_mlp = 8;
    d.n_relations = 16;
  } else {
    throw std::runtime_error("unknown model profile '" + name + "' (expected en, zh or tiny)");
  }
  return d;
}

BiaffineHead BiaffineHead::init(const std::string& prefix, std::size_t enc_width,
                                std::size_t dec_width, std::size_t mlp_width, std::size_t k,
                                RngState& rng) {
  BiaffineHead h;
  h.enc_mlp = MlpParams::init(prefix + ".enc_mlp", enc_width, mlp_width, Activation::relu, rng);
  h.dec_mlp = MlpParams::init(prefix + ".dec_mlp", dec_width, mlp_width, Activation::relu, rng);
  const double r = std::sqrt(6.0 / static_cast<double>(2 * mlp_width));
  h.w = Parameter(prefix + ".w", uniform_tensor({mlp_width, k, mlp_width}, r, rng));
  h.u = Parameter(prefix + ".u", glorot_matrix(k, mlp_width, rng));
  h.v = Parameter(prefix + ".v", glorot_matrix(k, mlp_width, rng));
  h.b = Parameter(prefix + ".b", Tensor::zeros({k}));
  return h;
}

void BiaffineHead::visit(const std::function<void(Parameter&)>& fn) {
  enc_mlp.visit(fn);
  dec_mlp.visit(fn);
  fn(w);
  fn(u);
  fn(v);
  fn(b);
}

ModelParams ModelParams::init(const ModelDims& dims, const Vocabulary& vocab,
                              EmbeddingTable word_embeddings, RngState& rng) {
  if (word_embeddings.table.value.rank() != 2 ||
      word_embeddings.table.value.shape[0] != vocab.tokens.size() ||
      word_embeddings.dim != dims.word_dim) {
    throw std::runtime_error("word embedding table has shape " +
                             shape_str(word_embeddings.table.value.shape) + ", expected (" +
                             std::to_string(vocab.tokens.size()) + ", " +
                             std::to_string(dims.word_dim) + ")");
  }
  ModelParams p;
  p.dims = dims;
  p.dims.n_relations = vocab.n_relations() > 0 ? vocab.n_relations() : dims.n_relations;
  p.word_emb = std::move(word_embeddings);
  p.word_emb.table.trainable = false;
  p.word_emb.trainable = false;
  p.pos_emb = random_embeddings("pos_emb", vocab.pos_tags.size(), dims.pos_dim, rng, true);

  const std::size_t word_input = dims.word_dim + dims.pos_dim;
  p.edu_fwd = GruCellParams::init("edu_gru_fwd", word_input, dims.edu_gru_hidden, rng);
  p.edu_bwd = GruCellParams::init("edu_gru_bwd", word_input, dims.edu_gru_hidden, rng);
  p.attn_q = Parameter("attn_q", uniform_tensor({dims.edu_vec_width()},
                                                std::sqrt(6.0 / (dims.edu_vec_width() + 1.0)),
                                                rng));
  p.seq_fwd = GruCellParams::init("seq_gru_fwd", dims.edu_vec_width(), dims.seq_gru_hidden, rng);
  p.seq_bwd = GruCellParams::init("seq_gru_bwd", dims.edu_vec_width(), dims.seq_gru_hidden, rng);
  p.conv = ConvWidth2Params::init("split_conv", dims.ctx_vec_width(), dims.split_vec_width(), rng);
  p.split_fwd =
      GruCellParams::init("split_gru_fwd", dims.split_vec_width(), dims.split_gru_hidden, rng);
  p.split_bwd =
      GruCellParams::init("split_gru_bwd", dims.split_vec_width(), dims.split_gru_hidden, rng);
  p.dec_init = MlpParams::init("dec_init", dims.split_enc_width(), dims.decoder_hidden,
                               Activation::none, rng);
  p.dec_cell =
      GruCellParams::init("dec_gru", 2 * dims.split_enc_width(), dims.decoder_hidden, rng);
  p.split_head = BiaffineHead::init("split_head", dims.split_enc_width(), dims.decoder_hidden,
                                    dims.split_mlp, 1, rng);
  p.nuc_head = BiaffineHead::init("nuc_head", dims.split_enc_width(), dims.decoder_hidden,
                                  dims.nuc_mlp, 3, rng);
  p.rel_head = BiaffineHead::init("rel_head", dims.split_enc_width(), dims.decoder_hidden,
                                  dims.rel_mlp, p.dims.n_relations, rng);
  return p;
}

void ModelParams::visit(const std::function<void(Parameter&)>& fn) {
  fn(word_emb.table);
  fn(pos_emb.table);
  edu_fwd.visit(fn);
  edu_bwd.visit(fn);
  fn(attn_q);
  seq_fwd.visit(fn);
  seq_bwd.visit(fn);
  conv.visit(fn);
  split_fwd.visit(fn);
  split_bwd.visit(fn);
  dec_init.visit(fn);
  dec_cell.visit(fn);
  split_head.visit(fn);
  nuc_head.visit(fn);
  rel_head.visit(fn);
}

void ModelParams::visit(const std::function<void(const Parameter&)>& fn) const {
  const_cast<ModelParams*>(this)->visit([&](Parameter& p) { fn(p); });
}

std::vector<Parameter*> ModelParams::all_blocks() {
  std::vector<Parameter*> out;
  visit([&](Parameter& p) { out.push_back(&p); });
  return out;
}

std::vector<Parameter*> ModelParams::trainable_blocks() {
  std::vector<Parameter*> out;
  visit([&](Parameter& p) {
    if (p.trainable) out.push_back(&p);
  });
  return out;
}

namespace {

constexpr int kCheckpointVersion = 1;

json dims_to_json(const ModelDims& d) {
  return json{{"word_dim", d.word_dim},
              {"pos_dim", d.pos_dim},
              {"edu_gru_hidden", d.edu_gru_hidden},
              {"seq_gru_hidden", d.seq_gru_hidden},
              {"split_gru_hidden", d.split_gru_hidden},
              {"decoder_hidden", d.decoder_hidden},
              {"split_mlp", d.split_mlp},
              {"nuc_mlp", d.nuc_mlp},
              {"rel_mlp", d.rel_mlp},
              {"n_relations", d.n_relations},
              {"literal_attention", d.literal_attention}};
}

ModelDims dims_from_json(const json& j) {
  ModelDims d;
  d.word_dim = j.at("word_dim").get<std::size_t>();
  d.pos_dim = j.at("pos_dim").get<std::size_t>();
  d.edu_gru_hidden = j.at("edu_gru_hidden").get<std::size_t>();
  d.seq_gru_hidden = j.at("seq_gru_hidden").get<std::size_t>();
  d.split_gru_hidden = j.at("split_gru_hidden").get<std::size_t>();
  d.decoder_hidden = j.at("decoder_hidden").get<std::size_t>();
  d.split_mlp = j.at("split_mlp").get<std::size_t>();
  d.nuc_mlp = j.at("nuc_mlp").get<std::size_t>();
  d.rel_mlp = j.at("rel_mlp").get<std::size_t>();
  d.n_relations = j.at("n_relations").get<std::size_t>();
  d.literal_attention = j.at("literal_attention").get<bool>();
  return d;
}

json vocab_to_json(const Vocabulary& v) {
  return json{{"tokens", v.tokens}, {"pos_tags", v.pos_tags}, {"relations", v.relations}};
}

Vocabulary vocab_from_json(const json& j) {
  Vocabulary v;
  v.tokens = j.at("tokens").get<std::vector<std::string>>();
  v.pos_tags = j.at("pos_tags").get<std::vector<std::string>>();
  v.relations = j.at("relations").get<std::vector<std::string>>();
  v.rebuild_indices();
  return v;
}

json checkpoint_json(const ModelParams& params, const Vocabulary& vocab) {
  json blocks = json::array();
  params.visit([&](const Parameter& p) {
    blocks.push_back(json{{"name", p.name},
                          {"shape", p.value.shape},
                          {"trainable", p.trainable},
                          {"values", p.value.values}});
  });
  return json{{"format", "drs-checkpoint"},
              {"version", kCheckpointVersion},
              {"dims", dims_to_json(params.dims)},
              {"vocab", vocab_to_json(vocab)},
              {"blocks", std::move(blocks)}};
}

json read_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.contains("format") || j["format"] != "drs-checkpoint") {
    throw std::runtime_error("checkpoint '" + path + "' has an unrecognized format tag");
  }
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw std::runtime_error("checkpoint '" + path + "' has version " +
                             j["version"].dump() + ", expected " +
                             std::to_string(kCheckpointVersion));
  }
  return j;
}

void fill_blocks_from_json(const json& j, ModelParams& params) {
  std::map<std::string, const json*> by_name;
  for (const auto& b : j.at("blocks")) by_name[b.at("name").get<std::string>()] = &b;
  params.visit([&](Parameter& p) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) {
      throw std::runtime_error("checkpoint is missing parameter block '" + p.name + "'");
    }
    const json& b = *it->second;
    const auto shape = b.at("shape").get<std::vector<std::size_t>>();
    if (shape != p.value.shape) {
      throw std::runtime_error("checkpoint block '" + p.name + "' has shape " +
                               shape_str(shape) + ", expected " + shape_str(p.value.shape));
    }
    p.value.values = b.at("values").get<std::vector<double>>();
    if (p.value.values.size() != shape_numel(shape)) {
      throw std::runtime_error("checkpoint block '" + p.name + "' has " +
                               std::to_string(p.value.values.size()) + " values for shape " +
                               shape_str(shape));
    }
    p.value.alloc_grad();
  });
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint file: " + path);
  out << checkpoint_json(params, vocab).dump() << "\n";
  if (!out) throw std::runtime_error("failed writing checkpoint file: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  const json j = read_checkpoint_file(path);
  Checkpoint ck;
  ck.dims = dims_from_json(j.at("dims"));
  ck.vocab = vocab_from_json(j.at("vocab"));
  RngState rng(0);  // placeholder values, overwritten below
  EmbeddingTable words =
      random_embeddings("word_emb", ck.vocab.tokens.size(), ck.dims.word_dim, rng, false);
  ck.params = ModelParams::init(ck.dims, ck.vocab, std::move(words), rng);
  fill_blocks_from_json(j, ck.params);
  return ck;
}

void load_checkpoint_into(const std::string& path, ModelParams& params, Vocabulary& vocab) {
  const json j = read_checkpoint_file(path);
  vocab = vocab_from_json(j.at("vocab"));
  fill_blocks_from_json(j, params);
}

}  // namespace drs
