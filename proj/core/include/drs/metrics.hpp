#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drs/tree.hpp"

namespace drs {

struct ParsevalCounts {
  std::size_t bare = 0;  // matched spans
  std::size_t nuc = 0;   // matched span + nuclearity
  std::size_t rel = 0;   // matched span + relation
  std::size_t full = 0;  // matched span + nuclearity + relation
  std::size_t gold_total = 0;
  std::size_t pred_total = 0;
};

// Per gold internal node (root excluded): span as inclusive EDU indices,
// height above the leaves, gold labels, and what the prediction matched.
struct NodeMatch {
  std::pair<std::size_t, std::size_t> span;
  std::size_t height = 0;
  Nuclearity nuclearity = Nuclearity::NN;
  std::string relation;
  bool bare = false, nuc = false, rel = false, full = false;
};

struct TreeEval {
  ParsevalCounts counts;
  std::vector<NodeMatch> gold_nodes;
  std::size_t n_edus = 0;
};

// Standard Parseval over internal-node spans, root span excluded (with gold
// segmentation it is always correct and would inflate every system equally).
TreeEval parseval(const DiscourseTree& pred, const DiscourseTree& gold);

struct Scores {
  double bare = 0.0, nuc = 0.0, rel = 0.0, full = 0.0;
};

struct EvalReport {
  Scores micro;  // pooled counts
  Scores macro;  // unweighted mean of per-tree scores
  std::size_t n_trees = 0;

  struct HeightRow {
    std::string bucket;
    std::size_t gold = 0, bare = 0, nuc = 0, rel = 0, full = 0;
  };
  std::vector<HeightRow> by_height;  // buckets 1..7 and >=8

  struct NuclearityRow {
    Nuclearity cls = Nuclearity::NN;
    std::size_t gold = 0, matched = 0;  // matched = span + nuclearity correct
    double pct = 0.0;
  };
  std::vector<NuclearityRow> by_nuclearity;  // NN, NS, SN

  struct EduCountRow {
    std::string bucket;
    std::size_t trees = 0, gold = 0;
    Scores micro;
  };
  std::vector<EduCountRow> by_edu_count;  // 1-5, 6-10, ..., 26-30
};

EvalReport aggregate_report(std::span<const TreeEval> evals);

std::string render_text(const EvalReport& report);

}  // namespace drs
