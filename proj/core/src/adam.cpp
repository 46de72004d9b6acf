#include "drs/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace drs {

void Adam::step(std::span<Parameter* const> params) {
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    p->value.alloc_grad();
    for (double g : p->value.grad) {
      if (!std::isfinite(g)) {
        throw std::runtime_error("adam: non-finite gradient in parameter block '" + p->name + "'");
      }
    }
  }
  if (cfg_.grad_clip_norm > 0.0) {
    double sq = 0.0;
    for (Parameter* p : params) {
      if (!p->trainable) continue;
      for (double g : p->value.grad) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (norm > cfg_.grad_clip_norm) {
      const double scale = cfg_.grad_clip_norm / norm;
      for (Parameter* p : params) {
        if (!p->trainable) continue;
        for (double& g : p->value.grad) g *= scale;
      }
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    Moments& mo = moments_[p];
    if (mo.m.size() != p->value.numel()) {
      mo.m.assign(p->value.numel(), 0.0);
      mo.v.assign(p->value.numel(), 0.0);
    }
    auto& vals = p->value.values;
    const auto& grads = p->value.grad;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      mo.m[i] = cfg_.beta1 * mo.m[i] + (1.0 - cfg_.beta1) * grads[i];
      mo.v[i] = cfg_.beta2 * mo.v[i] + (1.0 - cfg_.beta2) * grads[i] * grads[i];
      const double mhat = mo.m[i] / bc1;
      const double vhat = mo.v[i] / bc2;
      vals[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace drs
