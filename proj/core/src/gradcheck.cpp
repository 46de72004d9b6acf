#include "drs/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drs {

GradCheckReport finite_diff_check(const std::function<double()>& loss_fn,
                                  std::span<Parameter* const> params, double epsilon,
                                  double tolerance, std::size_t max_coords_per_block,
                                  RngState& rng) {
  if (epsilon < 1e-6 || epsilon > 1e-4) {
    throw std::runtime_error("finite_diff_check: epsilon " + std::to_string(epsilon) +
                             " outside [1e-6, 1e-4]");
  }
  if (max_coords_per_block == 0) {
    throw std::runtime_error("finite_diff_check: max_coords_per_block must be positive");
  }
  GradCheckReport report;
  report.tolerance = tolerance;
  for (Parameter* p : params) {
    GradCheckBlock block;
    block.name = p->name;
    const std::size_t n = p->value.numel();
    p->value.alloc_grad();

    std::vector<std::size_t> coords;
    if (n <= max_coords_per_block) {
      coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      // sample distinct coordinates
      std::vector<std::size_t> all(n);
      for (std::size_t i = 0; i < n; ++i) all[i] = i;
      for (std::size_t i = 0; i < max_coords_per_block; ++i) {
        const std::size_t j = i + rng.below(n - i);
        std::swap(all[i], all[j]);
      }
      coords.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(max_coords_per_block));
    }

    for (std::size_t c : coords) {
      const double saved = p->value.values[c];
      p->value.values[c] = saved + epsilon;
      const double lp = loss_fn();
      p->value.values[c] = saved - epsilon;
      const double lm = loss_fn();
      p->value.values[c] = saved;
      if (!std::isfinite(lp) || !std::isfinite(lm)) {
        throw std::runtime_error("finite_diff_check: non-finite loss while perturbing '" +
                                 p->name + "'");
      }
      const double numeric = (lp - lm) / (2.0 * epsilon);
      const double analytic = p->value.grad[c];
      const double rel = std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
      block.max_rel_error = std::max(block.max_rel_error, rel);
    }
    block.coords_checked = coords.size();
    report.max_rel_error = std::max(report.max_rel_error, block.max_rel_error);
    report.blocks.push_back(std::move(block));
  }
  report.pass = report.max_rel_error <= tolerance;
  return report;
}

}  // namespace drs
