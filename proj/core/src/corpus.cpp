#include "drs/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "drs/layers.hpp"

namespace drs {

using nlohmann::json;

namespace {

json tree_to_json(const TreeNode* n) {
  if (n->is_leaf()) return json{{"edu", n->edu}};
  json children = json::array();
  for (const auto& ch : n->children) children.push_back(tree_to_json(ch.get()));
  return json{{"children", std::move(children)},
              {"nuclearity", to_string(n->nuclearity)},
              {"relation", n->relation}};
}

std::unique_ptr<TreeNode> tree_from_json(const json& j) {
  if (j.contains("edu")) {
    if (!j["edu"].is_number_integer()) throw std::runtime_error("leaf 'edu' is not an integer");
    return leaf_node(j["edu"].get<int>());
  }
  if (!j.contains("children") || !j["children"].is_array()) {
    throw std::runtime_error("internal node lacks a 'children' array");
  }
  std::vector<std::unique_ptr<TreeNode>> kids;
  for (const auto& c : j["children"]) kids.push_back(tree_from_json(c));
  if (kids.size() < 2) throw std::runtime_error("internal node has fewer than 2 children");
  if (!j.contains("nuclearity") || !j.contains("relation")) {
    throw std::runtime_error("internal node lacks nuclearity or relation");
  }
  return internal_node(std::move(kids), nuclearity_from_string(j["nuclearity"].get<std::string>()),
                       j["relation"].get<std::string>());
}

Document doc_from_json(const json& j) {
  Document d;
  if (!j.contains("doc_id") || !j["doc_id"].is_string()) {
    throw std::runtime_error("record lacks a string 'doc_id'");
  }
  d.doc_id = j["doc_id"].get<std::string>();
  if (!j.contains("edus") || !j["edus"].is_array() || j["edus"].empty()) {
    throw std::runtime_error("record needs a non-empty 'edus' array");
  }
  for (const auto& edu_json : j["edus"]) {
    if (!edu_json.is_array() || edu_json.empty()) {
      throw std::runtime_error("every EDU must be a non-empty array of [token, pos] pairs");
    }
    std::vector<std::pair<std::string, std::string>> edu;
    for (const auto& pair_json : edu_json) {
      if (!pair_json.is_array() || pair_json.size() != 2) {
        throw std::runtime_error("EDU entries must be [token, pos] pairs");
      }
      edu.emplace_back(pair_json[0].get<std::string>(), pair_json[1].get<std::string>());
    }
    d.edus.push_back(std::move(edu));
  }
  if (j.contains("tree") && !j["tree"].is_null()) {
    DiscourseTree t(tree_from_json(j["tree"]));
    validate_tree(t);
    if (t.leaf_count() != d.n_edus()) {
      throw std::runtime_error("tree spans " + std::to_string(t.leaf_count()) +
                               " EDUs but the document has " + std::to_string(d.n_edus()));
    }
    d.gold_tree = std::move(t);
  }
  return d;
}

}  // namespace

Document Document::copy() const {
  Document d;
  d.doc_id = doc_id;
  d.edus = edus;
  if (gold_tree) d.gold_tree = gold_tree->clone();
  return d;
}

std::vector<Document> load_corpus(const std::string& path, CorpusFormat format,
                                  std::vector<std::string>* warnings) {
  if (format != CorpusFormat::json_trees) throw std::runtime_error("unsupported corpus format");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);

  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed JSON record: " + e.what());
    }
    try {
      docs.push_back(doc_from_json(j));
    } catch (const std::exception& e) {
      const std::string id = j.contains("doc_id") && j["doc_id"].is_string()
                                 ? j["doc_id"].get<std::string>()
                                 : "<unknown>";
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": doc '" + id +
                               "': " + e.what());
    }
  }
  if (docs.empty() && warnings) warnings->push_back(path + ": corpus is empty");
  return docs;
}

void save_corpus(const std::string& path, std::span<const Document> docs, CorpusFormat format) {
  if (format != CorpusFormat::json_trees) throw std::runtime_error("unsupported corpus format");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const auto& d : docs) {
    json edus = json::array();
    for (const auto& edu : d.edus) {
      json tokens = json::array();
      for (const auto& [tok, pos] : edu) tokens.push_back(json::array({tok, pos}));
      edus.push_back(std::move(tokens));
    }
    json j{{"doc_id", d.doc_id}, {"edus", std::move(edus)}};
    if (d.gold_tree) j["tree"] = tree_to_json(d.gold_tree->root.get());
    out << j.dump() << "\n";
  }
}

void strip_pos(std::vector<Document>& docs) {
  for (auto& d : docs) {
    for (auto& edu : d.edus) {
      for (auto& [tok, pos] : edu) pos = "X";
    }
  }
}

std::size_t Vocabulary::token_id(const std::string& tok) const {
  auto it = token_index.find(tok);
  return it == token_index.end() ? kUnk : it->second;
}

std::size_t Vocabulary::pos_id(const std::string& pos) const {
  auto it = pos_index.find(pos);
  return it == pos_index.end() ? kUnk : it->second;
}

std::size_t Vocabulary::relation_id(const std::string& rel) const {
  auto it = relation_index.find(rel);
  if (it == relation_index.end()) {
    throw std::runtime_error("relation label '" + rel + "' not in vocabulary");
  }
  return it->second;
}

void Vocabulary::rebuild_indices() {
  token_index.clear();
  pos_index.clear();
  relation_index.clear();
  for (std::size_t i = 0; i < tokens.size(); ++i) token_index[tokens[i]] = i;
  for (std::size_t i = 0; i < pos_tags.size(); ++i) pos_index[pos_tags[i]] = i;
  for (std::size_t i = 0; i < relations.size(); ++i) relation_index[relations[i]] = i;
}

Vocabulary build_vocab(std::span<const Document> docs, std::size_t min_token_count) {
  if (docs.empty()) throw std::runtime_error("build_vocab: empty corpus");

  std::map<std::string, std::size_t> token_counts;
  std::map<std::string, std::size_t> pos_counts;
  std::map<std::string, bool> relation_set;
  for (const auto& d : docs) {
    for (const auto& edu : d.edus) {
      for (const auto& [tok, pos] : edu) {
        ++token_counts[tok];
        ++pos_counts[pos];
      }
    }
    if (d.gold_tree) {
      std::vector<const TreeNode*> stack{d.gold_tree->root.get()};
      while (!stack.empty()) {
        const TreeNode* n = stack.back();
        stack.pop_back();
        if (n->is_leaf()) continue;
        relation_set[n->relation] = true;
        for (const auto& ch : n->children) stack.push_back(ch.get());
      }
    }
  }

  Vocabulary v;
  v.tokens = {"<pad>", "<unk>"};
  v.pos_tags = {"<pad>", "<unk>"};

  std::vector<std::pair<std::string, std::size_t>> toks(token_counts.begin(), token_counts.end());
  std::sort(toks.begin(), toks.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [tok, count] : toks) {
    if (count >= min_token_count) v.tokens.push_back(tok);
  }

  std::vector<std::pair<std::string, std::size_t>> poss(pos_counts.begin(), pos_counts.end());
  std::sort(poss.begin(), poss.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [pos, count] : poss) v.pos_tags.push_back(pos);

  for (const auto& entry : relation_set) v.relations.push_back(entry.first);  // map is sorted

  v.rebuild_indices();
  return v;
}

EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab,
                               std::size_t dim, RngState& rng) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);

  // rows missing from the file keep a small-scale seeded initialization
  EmbeddingTable table;
  table.dim = dim;
  table.table =
      Parameter("word_emb", uniform_tensor({vocab.tokens.size(), dim}, 0.05, rng), false);
  table.trainable = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    std::vector<double> row;
    double x;
    while (ls >> x) row.push_back(x);
    if (row.size() != dim) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(dim) + " values, found " +
                               std::to_string(row.size()));
    }
    auto it = vocab.token_index.find(tok);
    if (it == vocab.token_index.end()) continue;
    std::copy(row.begin(), row.end(), table.table.value.values.begin() + it->second * dim);
  }
  return table;
}

EmbeddingTable random_embeddings(const std::string& name, std::size_t rows, std::size_t dim,
                                 RngState& rng, bool trainable) {
  EmbeddingTable t;
  t.dim = dim;
  // uniform range giving rows unit expected squared norm
  const double r = std::sqrt(3.0 / static_cast<double>(dim));
  t.table = Parameter(name, uniform_tensor({rows, dim}, r, rng), trainable);
  t.trainable = trainable;
  return t;
}

}  // namespace drs
