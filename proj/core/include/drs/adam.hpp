#pragma once

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "drs/tape.hpp"

namespace drs {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double grad_clip_norm = 0.0;  // 0 disables clipping
};

// Adam with bias correction. Moment buffers are keyed by parameter block and
// sized on first use; frozen blocks are skipped.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(std::span<Parameter* const> params);
  std::size_t step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  struct Moments {
    std::vector<double> m, v;
  };

  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::unordered_map<Parameter*, Moments> moments_;
};

}  // namespace drs
