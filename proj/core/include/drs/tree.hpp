#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace drs {

enum class Nuclearity { NN = 0, NS = 1, SN = 2 };

std::string to_string(Nuclearity n);
Nuclearity nuclearity_from_string(const std::string& s);

// Discourse tree node. Leaves carry an EDU index; internal nodes carry two or
// more children plus nuclearity and relation labels. Trees are strictly
// binary after binarize_right.
struct TreeNode {
  int edu = -1;
  std::vector<std::unique_ptr<TreeNode>> children;
  Nuclearity nuclearity = Nuclearity::NN;
  std::string relation;

  bool is_leaf() const { return children.empty(); }
};

struct DiscourseTree {
  std::unique_ptr<TreeNode> root;

  DiscourseTree() = default;
  explicit DiscourseTree(std::unique_ptr<TreeNode> r) : root(std::move(r)) {}

  std::size_t leaf_count() const;
  DiscourseTree clone() const;
  bool is_binary() const;
};

bool tree_equal(const DiscourseTree& a, const DiscourseTree& b);

std::unique_ptr<TreeNode> leaf_node(int edu);
std::unique_ptr<TreeNode> internal_node(std::vector<std::unique_ptr<TreeNode>> children,
                                        Nuclearity nuc, std::string relation);

// Throws if the tree is malformed: leaves must be exactly 0..N-1 in left to
// right order and every internal node needs at least two children.
void validate_tree(const DiscourseTree& t);

// Right-branching binarization: children c1..ck become c1 over (c2 over
// (... ck)). Introduced nodes inherit the relation; their nuclearity comes
// from the policy in binarize_introduced_nuclearity.
DiscourseTree binarize_right(const DiscourseTree& t);
Nuclearity binarize_introduced_nuclearity(Nuclearity original);

// One decoder step over a span: split-point indices with the labels of the
// internal node created at the split.
struct SplitDecision {
  std::size_t left_boundary = 0;
  std::size_t right_boundary = 0;
  std::size_t split = 0;
  Nuclearity nuclearity = Nuclearity::NN;
  std::string relation;

  bool operator==(const SplitDecision&) const = default;
};

// Pre-order walk, left subtree before right; the decoder's stack discipline
// (push right child, then left) visits spans in exactly this order.
std::vector<SplitDecision> tree_to_decisions(const DiscourseTree& t);

// Inverse of tree_to_decisions. Throws if the sequence is not a consistent
// recursive partition of (0, n_edus), naming the offending span.
DiscourseTree decisions_to_tree(std::span<const SplitDecision> decisions, std::size_t n_edus);

}  // namespace drs
