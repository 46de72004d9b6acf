#include "drs/tree.hpp"

#include <stdexcept>

namespace drs {

std::string to_string(Nuclearity n) {
  switch (n) {
    case Nuclearity::NN: return "NN";
    case Nuclearity::NS: return "NS";
    case Nuclearity::SN: return "SN";
  }
  throw std::logic_error("to_string: bad nuclearity value");
}

Nuclearity nuclearity_from_string(const std::string& s) {
  if (s == "NN") return Nuclearity::NN;
  if (s == "NS") return Nuclearity::NS;
  if (s == "SN") return Nuclearity::SN;
  throw std::runtime_error("unknown nuclearity label '" + s + "' (expected NN, NS or SN)");
}

namespace {

std::size_t count_leaves(const TreeNode* n) {
  if (n->is_leaf()) return 1;
  std::size_t c = 0;
  for (const auto& ch : n->children) c += count_leaves(ch.get());
  return c;
}

std::unique_ptr<TreeNode> clone_node(const TreeNode* n) {
  auto out = std::make_unique<TreeNode>();
  out->edu = n->edu;
  out->nuclearity = n->nuclearity;
  out->relation = n->relation;
  out->children.reserve(n->children.size());
  for (const auto& ch : n->children) out->children.push_back(clone_node(ch.get()));
  return out;
}

bool node_equal(const TreeNode* a, const TreeNode* b) {
  if (a->is_leaf() != b->is_leaf()) return false;
  if (a->is_leaf()) return a->edu == b->edu;
  if (a->nuclearity != b->nuclearity || a->relation != b->relation) return false;
  if (a->children.size() != b->children.size()) return false;
  for (std::size_t i = 0; i < a->children.size(); ++i) {
    if (!node_equal(a->children[i].get(), b->children[i].get())) return false;
  }
  return true;
}

bool node_binary(const TreeNode* n) {
  if (n->is_leaf()) return true;
  if (n->children.size() != 2) return false;
  return node_binary(n->children[0].get()) && node_binary(n->children[1].get());
}

void validate_node(const TreeNode* n, int& next_edu) {
  if (n->is_leaf()) {
    if (n->edu != next_edu) {
      throw std::runtime_error("malformed tree: leaf edu " + std::to_string(n->edu) +
                               " out of order, expected " + std::to_string(next_edu));
    }
    ++next_edu;
    return;
  }
  if (n->children.size() < 2) {
    throw std::runtime_error("malformed tree: internal node with " +
                             std::to_string(n->children.size()) + " children");
  }
  for (const auto& ch : n->children) validate_node(ch.get(), next_edu);
}

std::unique_ptr<TreeNode> binarize_node(const TreeNode* n) {
  if (n->is_leaf()) return clone_node(n);
  std::vector<std::unique_ptr<TreeNode>> kids;
  kids.reserve(n->children.size());
  for (const auto& ch : n->children) kids.push_back(binarize_node(ch.get()));
  // fold right: c1 over (c2 over (... ck))
  while (kids.size() > 2) {
    auto right = std::move(kids.back());
    kids.pop_back();
    auto left = std::move(kids.back());
    kids.pop_back();
    auto merged = std::make_unique<TreeNode>();
    merged->children.push_back(std::move(left));
    merged->children.push_back(std::move(right));
    merged->relation = n->relation;
    merged->nuclearity = binarize_introduced_nuclearity(n->nuclearity);
    kids.push_back(std::move(merged));
  }
  auto out = std::make_unique<TreeNode>();
  out->children = std::move(kids);
  out->relation = n->relation;
  out->nuclearity = n->nuclearity;
  return out;
}

void decisions_walk(const TreeNode* n, std::size_t left, std::size_t right,
                    std::vector<SplitDecision>& out) {
  if (n->is_leaf()) return;
  const std::size_t split = left + count_leaves(n->children[0].get());
  out.push_back({left, right, split, n->nuclearity, n->relation});
  decisions_walk(n->children[0].get(), left, split, out);
  decisions_walk(n->children[1].get(), split, right, out);
}

std::unique_ptr<TreeNode> build_from_decisions(std::span<const SplitDecision> decisions,
                                               std::size_t& next, std::size_t left,
                                               std::size_t right) {
  if (right - left == 1) return leaf_node(static_cast<int>(left));
  if (next >= decisions.size()) {
    throw std::runtime_error("decisions_to_tree: missing decision for span (" +
                             std::to_string(left) + ", " + std::to_string(right) + ")");
  }
  const SplitDecision& d = decisions[next];
  if (d.left_boundary != left || d.right_boundary != right) {
    throw std::runtime_error("decisions_to_tree: decision covers span (" +
                             std::to_string(d.left_boundary) + ", " +
                             std::to_string(d.right_boundary) + "), expected (" +
                             std::to_string(left) + ", " + std::to_string(right) + ")");
  }
  if (d.split <= left || d.split >= right) {
    throw std::runtime_error("decisions_to_tree: split " + std::to_string(d.split) +
                             " outside span (" + std::to_string(left) + ", " +
                             std::to_string(right) + ")");
  }
  ++next;
  std::vector<std::unique_ptr<TreeNode>> kids;
  kids.push_back(build_from_decisions(decisions, next, left, d.split));
  kids.push_back(build_from_decisions(decisions, next, d.split, right));
  return internal_node(std::move(kids), d.nuclearity, d.relation);
}

}  // namespace

std::size_t DiscourseTree::leaf_count() const { return root ? count_leaves(root.get()) : 0; }

DiscourseTree DiscourseTree::clone() const {
  return root ? DiscourseTree(clone_node(root.get())) : DiscourseTree();
}

bool DiscourseTree::is_binary() const { return root && node_binary(root.get()); }

bool tree_equal(const DiscourseTree& a, const DiscourseTree& b) {
  if (!a.root || !b.root) return !a.root && !b.root;
  return node_equal(a.root.get(), b.root.get());
}

std::unique_ptr<TreeNode> leaf_node(int edu) {
  auto n = std::make_unique<TreeNode>();
  n->edu = edu;
  return n;
}

std::unique_ptr<TreeNode> internal_node(std::vector<std::unique_ptr<TreeNode>> children,
                                        Nuclearity nuc, std::string relation) {
  auto n = std::make_unique<TreeNode>();
  n->children = std::move(children);
  n->nuclearity = nuc;
  n->relation = std::move(relation);
  return n;
}

void validate_tree(const DiscourseTree& t) {
  if (!t.root) throw std::runtime_error("malformed tree: empty");
  int next_edu = 0;
  validate_node(t.root.get(), next_edu);
}

// Introduced nodes become NS whenever the original node's nucleus set reaches
// past its first child (all of NN, and SN whose nucleus is the last child);
// a mono-nuclear NS original keeps its label verbatim. Kept in one place so
// the policy can be swapped without touching the traversal.
Nuclearity binarize_introduced_nuclearity(Nuclearity original) {
  switch (original) {
    case Nuclearity::NN: return Nuclearity::NS;
    case Nuclearity::SN: return Nuclearity::NS;
    case Nuclearity::NS: return Nuclearity::NS;
  }
  throw std::logic_error("binarize_introduced_nuclearity: bad nuclearity value");
}

DiscourseTree binarize_right(const DiscourseTree& t) {
  validate_tree(t);
  return DiscourseTree(binarize_node(t.root.get()));
}

std::vector<SplitDecision> tree_to_decisions(const DiscourseTree& t) {
  validate_tree(t);
  if (!t.is_binary()) throw std::runtime_error("tree_to_decisions: tree is not binary");
  std::vector<SplitDecision> out;
  decisions_walk(t.root.get(), 0, t.leaf_count(), out);
  return out;
}

DiscourseTree decisions_to_tree(std::span<const SplitDecision> decisions, std::size_t n_edus) {
  if (n_edus == 0) throw std::runtime_error("decisions_to_tree: n_edus must be positive");
  std::size_t next = 0;
  DiscourseTree t(build_from_decisions(decisions, next, 0, n_edus));
  if (next != decisions.size()) {
    const SplitDecision& d = decisions[next];
    throw std::runtime_error("decisions_to_tree: unused decision for span (" +
                             std::to_string(d.left_boundary) + ", " +
                             std::to_string(d.right_boundary) + ")");
  }
  return t;
}

}  // namespace drs
