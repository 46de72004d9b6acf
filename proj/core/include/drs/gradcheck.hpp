#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "drs/tape.hpp"

namespace drs {

struct GradCheckBlock {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Compares analytic gradients already stored in each block's grad buffer
// against central differences of loss_fn. loss_fn must be a deterministic
// forward-only evaluation. Checks every coordinate of a block, or
// max_coords_per_block sampled ones when the block is larger. Relative error
// is |analytic - numeric| / max(1, |analytic|).
GradCheckReport finite_diff_check(const std::function<double()>& loss_fn,
                                  std::span<Parameter* const> params, double epsilon,
                                  double tolerance, std::size_t max_coords_per_block,
                                  RngState& rng);

}  // namespace drs
