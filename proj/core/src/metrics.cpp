#include "drs/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace drs {

namespace {

struct SpanInfo {
  std::size_t first = 0, last = 0;  // inclusive EDU indices
  std::size_t height = 0;
  Nuclearity nuclearity = Nuclearity::NN;
  std::string relation;
  bool is_root = false;
};

// Collects internal nodes; returns (first, last, height) of the subtree.
struct Walk {
  std::vector<SpanInfo> nodes;

  std::pair<std::pair<std::size_t, std::size_t>, std::size_t> run(const TreeNode* n,
                                                                  std::size_t& next_edu,
                                                                  bool is_root) {
    if (n->is_leaf()) {
      const std::size_t e = next_edu++;
      return {{e, e}, 0};
    }
    std::size_t first = 0, last = 0, height = 0;
    for (std::size_t i = 0; i < n->children.size(); ++i) {
      auto [span, h] = run(n->children[i].get(), next_edu, false);
      if (i == 0) first = span.first;
      last = span.second;
      height = std::max(height, h);
    }
    height += 1;
    nodes.push_back({first, last, height, n->nuclearity, n->relation, is_root});
    return {{first, last}, height};
  }
};

std::vector<SpanInfo> internal_spans(const DiscourseTree& t) {
  Walk w;
  std::size_t next = 0;
  w.run(t.root.get(), next, true);
  return w.nodes;
}

double ratio_pct(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

double f1_pct(std::size_t matched, std::size_t pred_total, std::size_t gold_total) {
  if (gold_total == 0 && pred_total == 0) return 100.0;  // vacuously perfect
  if (gold_total == 0 || pred_total == 0) return 0.0;
  const double p = static_cast<double>(matched) / static_cast<double>(pred_total);
  const double r = static_cast<double>(matched) / static_cast<double>(gold_total);
  if (p + r == 0.0) return 0.0;
  return 100.0 * 2.0 * p * r / (p + r);
}

std::size_t height_bucket(std::size_t h) { return h >= 8 ? 8 : h; }

int edu_bucket(std::size_t n) {
  if (n >= 1 && n <= 30) return static_cast<int>((n - 1) / 5);
  return -1;  // outside the reported ranges
}

const char* kEduBucketNames[6] = {"1-5", "6-10", "11-15", "16-20", "21-25", "26-30"};

}  // namespace

TreeEval parseval(const DiscourseTree& pred, const DiscourseTree& gold) {
  if (pred.leaf_count() != gold.leaf_count()) {
    throw std::runtime_error("parseval: leaf counts differ (pred " +
                             std::to_string(pred.leaf_count()) + ", gold " +
                             std::to_string(gold.leaf_count()) + ")");
  }
  const auto pred_nodes = internal_spans(pred);
  const auto gold_nodes = internal_spans(gold);

  std::map<std::pair<std::size_t, std::size_t>, const SpanInfo*> pred_by_span;
  for (const auto& p : pred_nodes) {
    if (!p.is_root) pred_by_span.emplace(std::make_pair(p.first, p.last), &p);
  }

  TreeEval ev;
  ev.n_edus = gold.leaf_count();
  for (const auto& g : gold_nodes) {
    if (g.is_root) continue;
    NodeMatch m;
    m.span = {g.first, g.last};
    m.height = g.height;
    m.nuclearity = g.nuclearity;
    m.relation = g.relation;
    auto it = pred_by_span.find(m.span);
    if (it != pred_by_span.end()) {
      m.bare = true;
      m.nuc = it->second->nuclearity == g.nuclearity;
      m.rel = it->second->relation == g.relation;
      m.full = m.nuc && m.rel;
    }
    ev.counts.bare += m.bare;
    ev.counts.nuc += m.nuc;
    ev.counts.rel += m.rel;
    ev.counts.full += m.full;
    ev.gold_nodes.push_back(std::move(m));
  }
  ev.counts.gold_total = ev.gold_nodes.size();
  ev.counts.pred_total = pred_by_span.size();
  return ev;
}

EvalReport aggregate_report(std::span<const TreeEval> evals) {
  if (evals.empty()) throw std::runtime_error("aggregate_report: no trees");

  EvalReport rep;
  rep.n_trees = evals.size();

  ParsevalCounts pooled;
  Scores macro_sum;
  for (const auto& ev : evals) {
    const auto& c = ev.counts;
    pooled.bare += c.bare;
    pooled.nuc += c.nuc;
    pooled.rel += c.rel;
    pooled.full += c.full;
    pooled.gold_total += c.gold_total;
    pooled.pred_total += c.pred_total;
    macro_sum.bare += f1_pct(c.bare, c.pred_total, c.gold_total);
    macro_sum.nuc += f1_pct(c.nuc, c.pred_total, c.gold_total);
    macro_sum.rel += f1_pct(c.rel, c.pred_total, c.gold_total);
    macro_sum.full += f1_pct(c.full, c.pred_total, c.gold_total);
  }
  rep.micro.bare = f1_pct(pooled.bare, pooled.pred_total, pooled.gold_total);
  rep.micro.nuc = f1_pct(pooled.nuc, pooled.pred_total, pooled.gold_total);
  rep.micro.rel = f1_pct(pooled.rel, pooled.pred_total, pooled.gold_total);
  rep.micro.full = f1_pct(pooled.full, pooled.pred_total, pooled.gold_total);
  const double n = static_cast<double>(evals.size());
  rep.macro = {macro_sum.bare / n, macro_sum.nuc / n, macro_sum.rel / n, macro_sum.full / n};

  // height breakdown, buckets 1..7 and >=8
  rep.by_height.resize(8);
  for (std::size_t b = 0; b < 8; ++b) {
    rep.by_height[b].bucket = b < 7 ? std::to_string(b + 1) : ">=8";
  }
  for (const auto& ev : evals) {
    for (const auto& m : ev.gold_nodes) {
      auto& row = rep.by_height[height_bucket(m.height) - 1];
      row.gold += 1;
      row.bare += m.bare;
      row.nuc += m.nuc;
      row.rel += m.rel;
      row.full += m.full;
    }
  }

  rep.by_nuclearity.resize(3);
  for (std::size_t i = 0; i < 3; ++i) rep.by_nuclearity[i].cls = static_cast<Nuclearity>(i);
  for (const auto& ev : evals) {
    for (const auto& m : ev.gold_nodes) {
      auto& row = rep.by_nuclearity[static_cast<std::size_t>(m.nuclearity)];
      row.gold += 1;
      row.matched += m.nuc;
    }
  }
  for (auto& row : rep.by_nuclearity) row.pct = ratio_pct(row.matched, row.gold);

  rep.by_edu_count.resize(6);
  std::vector<ParsevalCounts> bucket_counts(6);
  for (std::size_t b = 0; b < 6; ++b) rep.by_edu_count[b].bucket = kEduBucketNames[b];
  for (const auto& ev : evals) {
    const int b = edu_bucket(ev.n_edus);
    if (b < 0) continue;
    auto& row = rep.by_edu_count[static_cast<std::size_t>(b)];
    auto& c = bucket_counts[static_cast<std::size_t>(b)];
    row.trees += 1;
    c.bare += ev.counts.bare;
    c.nuc += ev.counts.nuc;
    c.rel += ev.counts.rel;
    c.full += ev.counts.full;
    c.gold_total += ev.counts.gold_total;
    c.pred_total += ev.counts.pred_total;
  }
  for (std::size_t b = 0; b < 6; ++b) {
    auto& row = rep.by_edu_count[b];
    const auto& c = bucket_counts[b];
    row.gold = c.gold_total;
    if (row.trees == 0) continue;
    row.micro.bare = f1_pct(c.bare, c.pred_total, c.gold_total);
    row.micro.nuc = f1_pct(c.nuc, c.pred_total, c.gold_total);
    row.micro.rel = f1_pct(c.rel, c.pred_total, c.gold_total);
    row.micro.full = f1_pct(c.full, c.pred_total, c.gold_total);
  }
  return rep;
}

std::string render_text(const EvalReport& rep) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1);
  os << "trees: " << rep.n_trees << "\n\n";
  os << "          bare    nuc    rel   full\n";
  os << "micro   " << std::setw(6) << rep.micro.bare << " " << std::setw(6) << rep.micro.nuc
     << " " << std::setw(6) << rep.micro.rel << " " << std::setw(6) << rep.micro.full << "\n";
  os << "macro   " << std::setw(6) << rep.macro.bare << " " << std::setw(6) << rep.macro.nuc
     << " " << std::setw(6) << rep.macro.rel << " " << std::setw(6) << rep.macro.full << "\n";

  os << "\nby height (gold nodes / matched)\n";
  os << "height   gold   bare    nuc    rel   full\n";
  for (const auto& row : rep.by_height) {
    os << std::setw(6) << row.bucket << " " << std::setw(6) << row.gold << " " << std::setw(6)
       << row.bare << " " << std::setw(6) << row.nuc << " " << std::setw(6) << row.rel << " "
       << std::setw(6) << row.full << "\n";
  }

  os << "\nby nuclearity (span+nuclearity recall)\n";
  os << "class    gold  match    pct\n";
  for (const auto& row : rep.by_nuclearity) {
    os << std::setw(5) << to_string(row.cls) << " " << std::setw(7) << row.gold << " "
       << std::setw(6) << row.matched << " " << std::setw(6) << row.pct << "\n";
  }

  os << "\nby EDU count (micro)\n";
  os << "bucket  trees   gold   bare    nuc    rel   full\n";
  for (const auto& row : rep.by_edu_count) {
    os << std::setw(6) << row.bucket << " " << std::setw(6) << row.trees << " " << std::setw(6)
       << row.gold << " " << std::setw(6) << row.micro.bare << " " << std::setw(6) << row.micro.nuc
       << " " << std::setw(6) << row.micro.rel << " " << std::setw(6) << row.micro.full << "\n";
  }
  return os.str();
}

}  // namespace drs
