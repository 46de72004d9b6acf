// drsparse: train, run and evaluate the top-down discourse parser.
//
// Subcommands: synth, train, parse, eval, gradcheck. Defaults come from a
// language profile (en/zh/tiny), may be overridden by a JSON config file
// (--config) and then by individual flags. Exit codes: 0 success,
// 1 validation error, 2 runtime error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "drs/corpus.hpp"
#include "drs/gradcheck.hpp"
#include "drs/metrics.hpp"
#include "drs/model.hpp"
#include "drs/synthetic.hpp"
#include "drs/training.hpp"

using nlohmann::json;

namespace {

struct RunConfig {
  std::string profile = "en";
  drs::ModelDims dims;
  drs::TrainConfig train;
  std::size_t min_token_count = 1;
  bool ignore_pos = false;
};

// Flag values land here first; they override profile and config-file
// defaults only when actually given.
struct Overrides {
  std::optional<std::string> profile;
  std::optional<std::string> config_path;
  std::optional<std::size_t> epochs, batch_size, min_token_count;
  std::optional<double> learning_rate, alpha_split, alpha_nuclearity, alpha_relation;
  std::optional<double> dropout, grad_clip_norm;
  std::optional<std::uint64_t> seed;
  bool ignore_pos = false;
};

void apply_profile(RunConfig& cfg, const std::string& profile) {
  cfg.profile = profile;
  cfg.dims = drs::ModelDims::profile(profile);
  if (profile == "en") {
    cfg.train.dropout = 0.2;
    cfg.train.batch_size = 10;
    cfg.train.epochs = 20;
    cfg.train.learning_rate = 0.001;
  } else if (profile == "zh") {
    cfg.train.dropout = 0.33;
    cfg.train.batch_size = 64;
    cfg.train.epochs = 20;
    cfg.train.learning_rate = 0.001;
  } else if (profile == "tiny") {
    cfg.train.dropout = 0.0;
    cfg.train.batch_size = 10;
    cfg.train.epochs = 200;
    cfg.train.learning_rate = 0.01;
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw CLI::ValidationError("--config", std::string("invalid JSON: ") + e.what());
  }
  if (j.contains("profile")) apply_profile(cfg, j["profile"].get<std::string>());
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
  };
  get("word_dim", cfg.dims.word_dim);
  get("pos_dim", cfg.dims.pos_dim);
  get("edu_gru_hidden", cfg.dims.edu_gru_hidden);
  get("seq_gru_hidden", cfg.dims.seq_gru_hidden);
  get("split_gru_hidden", cfg.dims.split_gru_hidden);
  get("decoder_hidden", cfg.dims.decoder_hidden);
  get("split_mlp", cfg.dims.split_mlp);
  get("nuc_mlp", cfg.dims.nuc_mlp);
  get("rel_mlp", cfg.dims.rel_mlp);
  get("n_relations", cfg.dims.n_relations);
  get("literal_attention", cfg.dims.literal_attention);
  get("epochs", cfg.train.epochs);
  get("batch_size", cfg.train.batch_size);
  get("learning_rate", cfg.train.learning_rate);
  get("alpha_split", cfg.train.alpha_split);
  get("alpha_nuclearity", cfg.train.alpha_nuclearity);
  get("alpha_relation", cfg.train.alpha_relation);
  get("dropout", cfg.train.dropout);
  get("grad_clip_norm", cfg.train.grad_clip_norm);
  get("seed", cfg.train.seed);
  get("min_token_count", cfg.min_token_count);
  get("ignore_pos", cfg.ignore_pos);
}

RunConfig resolve_config(const Overrides& o, const std::string& default_profile) {
  RunConfig cfg;
  apply_profile(cfg, o.profile.value_or(default_profile));
  if (o.config_path) apply_config_file(cfg, *o.config_path);
  if (o.profile) apply_profile(cfg, *o.profile);  // explicit flag beats config file
  if (o.epochs) cfg.train.epochs = *o.epochs;
  if (o.batch_size) cfg.train.batch_size = *o.batch_size;
  if (o.learning_rate) cfg.train.learning_rate = *o.learning_rate;
  if (o.alpha_split) cfg.train.alpha_split = *o.alpha_split;
  if (o.alpha_nuclearity) cfg.train.alpha_nuclearity = *o.alpha_nuclearity;
  if (o.alpha_relation) cfg.train.alpha_relation = *o.alpha_relation;
  if (o.dropout) cfg.train.dropout = *o.dropout;
  if (o.grad_clip_norm) cfg.train.grad_clip_norm = *o.grad_clip_norm;
  if (o.seed) cfg.train.seed = *o.seed;
  if (o.min_token_count) cfg.min_token_count = *o.min_token_count;
  if (o.ignore_pos) cfg.ignore_pos = true;
  return cfg;
}

// collects every violated field instead of stopping at the first
void validate_config(const RunConfig& cfg) {
  std::vector<std::string> errors;
  auto positive = [&](const char* name, auto v) {
    if (v == 0) errors.push_back(std::string(name) + " must be positive");
  };
  positive("word_dim", cfg.dims.word_dim);
  positive("pos_dim", cfg.dims.pos_dim);
  positive("edu_gru_hidden", cfg.dims.edu_gru_hidden);
  positive("seq_gru_hidden", cfg.dims.seq_gru_hidden);
  positive("split_gru_hidden", cfg.dims.split_gru_hidden);
  positive("decoder_hidden", cfg.dims.decoder_hidden);
  positive("split_mlp", cfg.dims.split_mlp);
  positive("nuc_mlp", cfg.dims.nuc_mlp);
  positive("rel_mlp", cfg.dims.rel_mlp);
  positive("epochs", cfg.train.epochs);
  positive("batch_size", cfg.train.batch_size);
  if (cfg.train.learning_rate <= 0) errors.push_back("learning_rate must be positive");
  if (cfg.train.alpha_split < 0) errors.push_back("alpha_split must be >= 0");
  if (cfg.train.alpha_nuclearity < 0) errors.push_back("alpha_nuclearity must be >= 0");
  if (cfg.train.alpha_relation < 0) errors.push_back("alpha_relation must be >= 0");
  if (cfg.train.dropout < 0 || cfg.train.dropout >= 1) {
    errors.push_back("dropout must lie in [0, 1)");
  }
  if (cfg.train.grad_clip_norm < 0) errors.push_back("grad_clip_norm must be >= 0");
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw CLI::ValidationError("config", msg);
  }
}

json dims_summary(const drs::ModelDims& d, const RunConfig& cfg) {
  return json{{"profile", cfg.profile},
              {"word_dim", d.word_dim},
              {"pos_dim", d.pos_dim},
              {"edu_gru_hidden", d.edu_gru_hidden},
              {"seq_gru_hidden", d.seq_gru_hidden},
              {"split_gru_hidden", d.split_gru_hidden},
              {"decoder_hidden", d.decoder_hidden},
              {"split_mlp", d.split_mlp},
              {"nuc_mlp", d.nuc_mlp},
              {"rel_mlp", d.rel_mlp},
              {"n_relations", d.n_relations},
              {"literal_attention", d.literal_attention},
              {"dropout", cfg.train.dropout},
              {"batch_size", cfg.train.batch_size},
              {"epochs", cfg.train.epochs},
              {"learning_rate", cfg.train.learning_rate},
              {"alpha_split", cfg.train.alpha_split},
              {"alpha_nuclearity", cfg.train.alpha_nuclearity},
              {"alpha_relation", cfg.train.alpha_relation},
              {"seed", cfg.train.seed}};
}

json scores_json(const drs::Scores& s) {
  return json{{"bare", s.bare}, {"nuc", s.nuc}, {"rel", s.rel}, {"full", s.full}};
}

json report_json(const drs::EvalReport& rep) {
  json by_height = json::array();
  for (const auto& row : rep.by_height) {
    by_height.push_back(json{{"bucket", row.bucket},
                             {"gold", row.gold},
                             {"bare", row.bare},
                             {"nuc", row.nuc},
                             {"rel", row.rel},
                             {"full", row.full}});
  }
  json by_nuc = json::array();
  for (const auto& row : rep.by_nuclearity) {
    by_nuc.push_back(json{{"class", drs::to_string(row.cls)},
                          {"gold", row.gold},
                          {"matched", row.matched},
                          {"pct", row.pct}});
  }
  json by_edu = json::array();
  for (const auto& row : rep.by_edu_count) {
    by_edu.push_back(json{{"bucket", row.bucket},
                          {"trees", row.trees},
                          {"gold", row.gold},
                          {"micro", scores_json(row.micro)}});
  }
  return json{{"micro", scores_json(rep.micro)},
              {"macro", scores_json(rep.macro)},
              {"n_trees", rep.n_trees},
              {"by_height", std::move(by_height)},
              {"by_nuclearity", std::move(by_nuc)},
              {"by_edu_count", std::move(by_edu)}};
}

void report_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_synth(const drs::SyntheticConfig& synth_cfg, const std::string& out_dir,
              const std::string& ratios) {
  std::size_t r_train = 0, r_dev = 0, r_test = 0;
  if (std::sscanf(ratios.c_str(), "%zu,%zu,%zu", &r_train, &r_dev, &r_test) != 3 ||
      r_train + r_dev + r_test == 0) {
    throw CLI::ValidationError("--split", "expected three comma-separated ratios");
  }
  const auto docs = drs::generate_synthetic(synth_cfg);
  const std::size_t total = docs.size();
  const std::size_t sum = r_train + r_dev + r_test;
  std::size_t n_train = total * r_train / sum;
  std::size_t n_dev = total * r_dev / sum;
  while (n_train + n_dev + total * r_test / sum < total) ++n_train;  // remainder to train

  std::filesystem::create_directories(out_dir);
  auto save_slice = [&](const std::string& name, std::size_t lo, std::size_t hi) {
    std::vector<drs::Document> slice;
    for (std::size_t i = lo; i < hi; ++i) slice.push_back(docs[i].copy());
    drs::save_corpus(out_dir + "/" + name, slice);
  };
  save_slice("train.jsonl", 0, n_train);
  save_slice("dev.jsonl", n_train, n_train + n_dev);
  save_slice("test.jsonl", n_train + n_dev, total);
  std::cout << json{{"out_dir", out_dir},
                    {"train", n_train},
                    {"dev", n_dev},
                    {"test", total - n_train - n_dev},
                    {"seed", synth_cfg.seed}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_train(RunConfig& cfg, const std::string& train_path, const std::string& dev_path,
              const std::string& embeddings_path) {
  validate_config(cfg);
  std::vector<std::string> warnings;
  auto train_docs = drs::load_corpus(train_path, drs::CorpusFormat::json_trees, &warnings);
  std::vector<drs::Document> dev_docs;
  if (!dev_path.empty()) {
    dev_docs = drs::load_corpus(dev_path, drs::CorpusFormat::json_trees, &warnings);
  }
  report_warnings(warnings);
  if (train_docs.empty()) {
    std::cerr << "error: training corpus is empty\n";
    return 1;
  }
  if (cfg.ignore_pos) {
    drs::strip_pos(train_docs);
    drs::strip_pos(dev_docs);
  }

  const drs::Vocabulary vocab = drs::build_vocab(train_docs, cfg.min_token_count);
  drs::RngState rng(cfg.train.seed);
  drs::EmbeddingTable words =
      embeddings_path.empty()
          ? drs::random_embeddings("word_emb", vocab.tokens.size(), cfg.dims.word_dim, rng, false)
          : drs::load_embeddings(embeddings_path, vocab, cfg.dims.word_dim, rng);
  drs::ModelParams model = drs::ModelParams::init(cfg.dims, vocab, std::move(words), rng);

  std::cout << dims_summary(model.dims, cfg).dump() << "\n";

  const drs::TrainResult result = drs::train(model, train_docs, dev_docs, vocab, cfg.train);
  json summary{{"epochs", cfg.train.epochs}};
  if (!dev_docs.empty()) {
    summary["best_epoch"] = result.best_epoch;
    summary["best_dev_full_micro"] = result.best_dev_full_micro;
  }
  if (!result.best_checkpoint_path.empty()) {
    summary["best_checkpoint"] = result.best_checkpoint_path;
  }
  if (!result.final_checkpoint_path.empty()) {
    summary["final_checkpoint"] = result.final_checkpoint_path;
  }
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_parse(const std::string& checkpoint_path, const std::string& input_path,
              const std::string& output_path, bool ignore_pos) {
  drs::Checkpoint ck = drs::load_checkpoint(checkpoint_path);
  std::vector<std::string> warnings;
  auto docs = drs::load_corpus(input_path, drs::CorpusFormat::json_trees, &warnings);
  report_warnings(warnings);
  if (ignore_pos) drs::strip_pos(docs);

  std::size_t tokens = 0, unknown = 0;
  for (const auto& d : docs) {
    for (const auto& edu : d.edus) {
      for (const auto& [tok, pos] : edu) {
        ++tokens;
        if (ck.vocab.token_id(tok) == drs::Vocabulary::kUnk) ++unknown;
      }
    }
  }
  if (tokens > 0 && unknown > 0) {
    std::cerr << "warning: " << unknown << "/" << tokens << " tokens ("
              << 100.0 * static_cast<double>(unknown) / static_cast<double>(tokens)
              << "%) are out of vocabulary\n";
  }

  for (auto& d : docs) d.gold_tree = drs::parse_document(ck.params, d, ck.vocab);
  drs::save_corpus(output_path, docs);
  std::cout << json{{"parsed", docs.size()}, {"output", output_path}}.dump() << "\n";
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gold_path,
             const std::string& report_json_path) {
  std::vector<std::string> warnings;
  auto pred = drs::load_corpus(pred_path, drs::CorpusFormat::json_trees, &warnings);
  auto gold = drs::load_corpus(gold_path, drs::CorpusFormat::json_trees, &warnings);
  report_warnings(warnings);

  std::map<std::string, const drs::Document*> pred_by_id;
  for (const auto& d : pred) pred_by_id[d.doc_id] = &d;

  std::vector<drs::TreeEval> evals;
  for (const auto& g : gold) {
    auto it = pred_by_id.find(g.doc_id);
    if (it == pred_by_id.end()) {
      throw std::runtime_error("eval: no prediction for doc '" + g.doc_id + "'");
    }
    const drs::Document& p = *it->second;
    if (!p.gold_tree || !g.gold_tree) {
      throw std::runtime_error("eval: doc '" + g.doc_id + "' lacks a tree");
    }
    const auto pred_tree =
        p.gold_tree->is_binary() ? p.gold_tree->clone() : drs::binarize_right(*p.gold_tree);
    const auto gold_tree =
        g.gold_tree->is_binary() ? g.gold_tree->clone() : drs::binarize_right(*g.gold_tree);
    evals.push_back(drs::parseval(pred_tree, gold_tree));
  }
  const drs::EvalReport rep = drs::aggregate_report(evals);
  std::cout << drs::render_text(rep);
  if (!report_json_path.empty()) {
    std::ofstream out(report_json_path);
    if (!out) throw std::runtime_error("eval: cannot write " + report_json_path);
    out << report_json(rep).dump(2) << "\n";
  }
  return 0;
}

int cmd_gradcheck(const RunConfig& cfg, std::size_t n_samples, std::size_t n_docs,
                  double epsilon, double tolerance) {
  if (n_samples == 0) throw CLI::ValidationError("--samples", "must be positive");
  if (n_docs == 0) throw CLI::ValidationError("--docs", "must be positive");
  validate_config(cfg);

  drs::SyntheticConfig synth;
  synth.n_docs = n_docs;
  synth.edu_count_min = 3;
  synth.edu_count_max = 3;
  synth.n_relations = cfg.dims.n_relations;
  synth.seed = cfg.train.seed;
  auto docs = drs::generate_synthetic(synth);

  const drs::Vocabulary vocab = drs::build_vocab(docs);
  drs::RngState rng(cfg.train.seed);
  drs::EmbeddingTable words =
      drs::random_embeddings("word_emb", vocab.tokens.size(), cfg.dims.word_dim, rng, false);
  drs::ModelParams model = drs::ModelParams::init(cfg.dims, vocab, std::move(words), rng);

  const drs::LossWeights weights{cfg.train.alpha_split, cfg.train.alpha_nuclearity,
                                 cfg.train.alpha_relation};
  auto loss_value = [&]() {
    double total = 0.0;
    for (const auto& d : docs) {
      drs::Tape t;
      total += t.scalar_value(
          drs::document_loss(t, model, d, vocab, weights, drs::EncodeOptions{}).loss);
    }
    return total;
  };

  std::vector<drs::Parameter*> blocks = model.trainable_blocks();
  for (auto* b : blocks) b->zero_grad();
  for (const auto& d : docs) {
    drs::Tape t;
    t.backward(drs::document_loss(t, model, d, vocab, weights, drs::EncodeOptions{}).loss);
  }

  drs::RngState sample_rng(cfg.train.seed + 1);
  const drs::GradCheckReport report =
      drs::finite_diff_check(loss_value, blocks, epsilon, tolerance, n_samples, sample_rng);
  for (const auto& block : report.blocks) {
    std::cout << (block.max_rel_error <= tolerance ? "ok   " : "FAIL ") << block.name
              << " max_rel_err=" << block.max_rel_error << " coords=" << block.coords_checked
              << "\n";
  }
  std::cout << json{{"max_rel_error", report.max_rel_error},
                    {"tolerance", tolerance},
                    {"pass", report.pass}}
                   .dump()
            << "\n";
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"top-down discourse rhetorical structure parser"};
  app.require_subcommand(1);

  Overrides ov;
  std::string embeddings_path, checkpoint_dir, log_path;
  std::string train_path, dev_path, checkpoint_path, input_path, output_path;
  std::string pred_path, gold_path, report_json_path;
  std::string out_dir, split_ratios = "80,10,10";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--profile", ov.profile, "model profile: en, zh or tiny")
        ->check(CLI::IsMember({"en", "zh", "tiny"}));
    sub->add_option("--config", ov.config_path, "JSON config file");
    sub->add_option("--seed", ov.seed, "random seed");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  drs::SyntheticConfig synth_cfg;
  synth->add_option("--out-dir", out_dir, "output directory")->required();
  synth->add_option("--n-docs", synth_cfg.n_docs, "number of documents");
  synth->add_option("--edu-min", synth_cfg.edu_count_min, "minimum EDUs per document");
  synth->add_option("--edu-max", synth_cfg.edu_count_max, "maximum EDUs per document");
  synth->add_option("--vocab-size", synth_cfg.vocab_size, "filler vocabulary size");
  synth->add_option("--n-relations", synth_cfg.n_relations, "relation label count");
  synth->add_option("--seed", synth_cfg.seed, "random seed");
  synth->add_option("--split", split_ratios, "train,dev,test ratios (default 80,10,10)");
  synth->add_option("--id-prefix", synth_cfg.id_prefix, "doc id prefix");

  CLI::App* train = app.add_subcommand("train", "train a model");
  add_common(train);
  train->add_option("--train", train_path, "training corpus (JSON lines)")->required();
  train->add_option("--dev", dev_path, "development corpus");
  train->add_option("--embeddings", embeddings_path, "pretrained word embedding file");
  train->add_option("--checkpoint-dir", checkpoint_dir, "checkpoint output directory");
  train->add_option("--log", log_path, "training log (JSON lines)");
  train->add_option("--epochs", ov.epochs, "training epochs");
  train->add_option("--batch-size", ov.batch_size, "documents per batch");
  train->add_option("--lr", ov.learning_rate, "learning rate");
  train->add_option("--alpha-split", ov.alpha_split, "split loss weight");
  train->add_option("--alpha-nuclearity", ov.alpha_nuclearity, "nuclearity loss weight");
  train->add_option("--alpha-relation", ov.alpha_relation, "relation loss weight");
  train->add_option("--dropout", ov.dropout, "dropout rate");
  train->add_option("--grad-clip", ov.grad_clip_norm, "max gradient norm (0 = off)");
  train->add_option("--min-token-count", ov.min_token_count, "vocabulary frequency threshold");
  train->add_flag("--ignore-pos", ov.ignore_pos, "replace POS tags with a dummy tag");

  CLI::App* parse = app.add_subcommand("parse", "parse documents with a checkpoint");
  parse->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  parse->add_option("--input", input_path, "input corpus")->required();
  parse->add_option("--output", output_path, "output corpus with predicted trees")->required();
  bool parse_ignore_pos = false;
  parse->add_flag("--ignore-pos", parse_ignore_pos, "replace POS tags with a dummy tag");

  CLI::App* eval = app.add_subcommand("eval", "score predictions against gold trees");
  eval->add_option("--pred", pred_path, "predicted corpus")->required();
  eval->add_option("--gold", gold_path, "gold corpus")->required();
  eval->add_option("--report-json", report_json_path, "write the report as JSON");

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_common(gradcheck);
  std::size_t gc_samples = 200, gc_docs = 5;
  double gc_epsilon = 1e-5, gc_tolerance = 1e-3;
  gradcheck->add_option("--samples", gc_samples, "sampled coordinates per parameter block");
  gradcheck->add_option("--docs", gc_docs, "number of synthetic documents");
  gradcheck->add_option("--epsilon", gc_epsilon, "central difference step");
  gradcheck->add_option("--tolerance", gc_tolerance, "max relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_cfg, out_dir, split_ratios);
    if (train->parsed()) {
      RunConfig cfg = resolve_config(ov, "en");
      cfg.train.checkpoint_dir = checkpoint_dir;
      cfg.train.log_path = log_path;
      return cmd_train(cfg, train_path, dev_path, embeddings_path);
    }
    if (parse->parsed()) {
      return cmd_parse(checkpoint_path, input_path, output_path, parse_ignore_pos);
    }
    if (eval->parsed()) return cmd_eval(pred_path, gold_path, report_json_path);
    if (gradcheck->parsed()) {
      RunConfig cfg = resolve_config(ov, "tiny");
      return cmd_gradcheck(cfg, gc_samples, gc_docs, gc_epsilon, gc_tolerance);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
