#include "drs/synthetic.hpp"

#include <stdexcept>

namespace drs {

namespace {

std::string relation_name(std::size_t i) {
  std::string s = std::to_string(i);
  if (s.size() < 2) s = "0" + s;
  return "rel" + s;
}

std::unique_ptr<TreeNode> random_tree(std::size_t left, std::size_t right, std::size_t n_rel,
                                      RngState& rng) {
  if (right - left == 1) return leaf_node(static_cast<int>(left));
  const std::size_t split = left + 1 + rng.below(right - left - 1);
  std::vector<std::unique_ptr<TreeNode>> kids;
  kids.push_back(random_tree(left, split, n_rel, rng));
  kids.push_back(random_tree(split, right, n_rel, rng));
  const auto nuc = static_cast<Nuclearity>(rng.below(3));
  return internal_node(std::move(kids), nuc, relation_name(rng.below(n_rel)));
}

struct SplitInfo {
  std::size_t depth = 0;
  Nuclearity nuclearity = Nuclearity::NN;
  std::string relation;
};

// Each interior split index belongs to exactly one internal node.
void collect_splits(const TreeNode* n, std::size_t left, std::size_t depth,
                    std::vector<SplitInfo>& by_split, std::size_t& leaves_seen) {
  if (n->is_leaf()) {
    ++leaves_seen;
    return;
  }
  const std::size_t before = leaves_seen;
  collect_splits(n->children[0].get(), left, depth + 1, by_split, leaves_seen);
  const std::size_t split = left + (leaves_seen - before);
  by_split[split] = {depth, n->nuclearity, n->relation};
  collect_splits(n->children[1].get(), split, depth + 1, by_split, leaves_seen);
}

void collect_parents(const TreeNode* n, std::vector<const TreeNode*>& parent_of_leaf) {
  if (n->is_leaf()) return;
  for (const auto& ch : n->children) {
    if (ch->is_leaf()) {
      parent_of_leaf[static_cast<std::size_t>(ch->edu)] = n;
    } else {
      collect_parents(ch.get(), parent_of_leaf);
    }
  }
}

}  // namespace

std::vector<Document> generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.edu_count_min < 2 || cfg.edu_count_max > 30 || cfg.edu_count_min > cfg.edu_count_max) {
    throw std::runtime_error("generate_synthetic: edu count range must lie within [2, 30]");
  }
  if (cfg.n_docs == 0) throw std::runtime_error("generate_synthetic: n_docs must be positive");
  if (cfg.n_relations == 0 || cfg.vocab_size == 0) {
    throw std::runtime_error("generate_synthetic: vocab_size and n_relations must be positive");
  }

  RngState rng(cfg.seed);
  std::vector<Document> docs;
  docs.reserve(cfg.n_docs);
  for (std::size_t di = 0; di < cfg.n_docs; ++di) {
    const std::size_t n =
        cfg.edu_count_min + rng.below(cfg.edu_count_max - cfg.edu_count_min + 1);
    DiscourseTree tree(random_tree(0, n, cfg.n_relations, rng));

    std::vector<SplitInfo> by_split(n);  // interior indices 1..n-1 used
    std::size_t seen = 0;
    collect_splits(tree.root.get(), 0, 0, by_split, seen);
    std::vector<const TreeNode*> parent_of_leaf(n, nullptr);
    collect_parents(tree.root.get(), parent_of_leaf);

    Document d;
    d.doc_id = cfg.id_prefix + "-" + std::to_string(di);
    for (std::size_t e = 0; e < n; ++e) {
      std::vector<std::pair<std::string, std::string>> edu;
      const TreeNode* parent = parent_of_leaf[e];
      edu.emplace_back("p_" + to_string(parent->nuclearity) + "_" + parent->relation, "T0");
      if (e == 0) {
        edu.emplace_back("d_none", "T1");
        edu.emplace_back("m_none", "T2");
      } else {
        const SplitInfo& s = by_split[e];
        edu.emplace_back("d" + std::to_string(s.depth), "T1");
        edu.emplace_back("m_" + to_string(s.nuclearity) + "_" + s.relation, "T2");
      }
      const std::size_t fillers = 1 + rng.below(2);
      for (std::size_t f = 0; f < fillers; ++f) {
        edu.emplace_back("w" + std::to_string(rng.below(cfg.vocab_size)), "T3");
      }
      d.edus.push_back(std::move(edu));
    }
    d.gold_tree = std::move(tree);
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace drs
