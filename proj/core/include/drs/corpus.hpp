#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drs/tape.hpp"
#include "drs/tree.hpp"

namespace drs {

// One document: EDUs as (token, pos) sequences plus an optional gold tree.
struct Document {
  std::string doc_id;
  std::vector<std::vector<std::pair<std::string, std::string>>> edus;
  std::optional<DiscourseTree> gold_tree;

  std::size_t n_edus() const { return edus.size(); }
  Document copy() const;
};

enum class CorpusFormat { json_trees };

// JSON-lines interchange: one object per line with fields doc_id, edus
// (array of arrays of [token, pos] pairs) and an optional tree (nested
// {children, nuclearity, relation} objects with {edu: i} leaves).
std::vector<Document> load_corpus(const std::string& path,
                                  CorpusFormat format = CorpusFormat::json_trees,
                                  std::vector<std::string>* warnings = nullptr);
void save_corpus(const std::string& path, std::span<const Document> docs,
                 CorpusFormat format = CorpusFormat::json_trees);

// Replaces every POS tag with a single dummy tag.
void strip_pos(std::vector<Document>& docs);

struct Vocabulary {
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;

  std::vector<std::string> tokens;     // index -> string, [0]=<pad>, [1]=<unk>
  std::vector<std::string> pos_tags;   // same reserved layout
  std::vector<std::string> relations;  // lexicographic

  std::map<std::string, std::size_t> token_index;
  std::map<std::string, std::size_t> pos_index;
  std::map<std::string, std::size_t> relation_index;

  std::size_t token_id(const std::string& tok) const;  // falls back to kUnk
  std::size_t pos_id(const std::string& pos) const;
  std::size_t relation_id(const std::string& rel) const;  // throws on unknown
  std::size_t n_relations() const { return relations.size(); }

  void rebuild_indices();
};

// Deterministic: tokens ordered by frequency then lexicographically; tokens
// under min_token_count map to <unk>.
Vocabulary build_vocab(std::span<const Document> docs, std::size_t min_token_count = 1);

struct EmbeddingTable {
  std::size_t dim = 0;
  Parameter table;  // rows aligned to vocabulary indices
  bool trainable = false;
};

// Text format: token followed by dim whitespace-separated floats per line.
// Tokens absent from the file get seeded uniform [-0.05, 0.05] rows. The
// returned table is frozen.
EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab,
                               std::size_t dim, RngState& rng);

EmbeddingTable random_embeddings(const std::string& name, std::size_t rows, std::size_t dim,
                                 RngState& rng, bool trainable);

}  // namespace drs
