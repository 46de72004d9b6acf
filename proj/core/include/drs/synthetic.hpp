#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drs/corpus.hpp"

namespace drs {

struct SyntheticConfig {
  std::size_t n_docs = 10;
  std::size_t edu_count_min = 2;
  std::size_t edu_count_max = 6;
  std::size_t vocab_size = 40;   // filler tokens
  std::size_t n_relations = 16;
  std::uint64_t seed = 1;
  std::string id_prefix = "synth";
};

// Documents with random binary gold trees whose token content encodes the
// tree: every EDU starts with a marker for its parent node's relation and
// nuclearity, followed by markers carrying the depth and the labels of the
// split point at the EDU's left boundary. Surface text therefore determines
// the gold decisions, so the tree is recoverable by rank-then-classify.
// Pure function of the config.
std::vector<Document> generate_synthetic(const SyntheticConfig& config);

}  // namespace drs
