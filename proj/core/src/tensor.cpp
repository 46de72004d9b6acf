#include "drs/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace drs {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  Tensor t;
  t.shape = std::move(shape);
  t.values.assign(shape_numel(t.shape), 0.0);
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.shape = {1};
  t.values = {v};
  return t;
}

Tensor Tensor::vec(std::vector<double> v) {
  Tensor t;
  t.shape = {v.size()};
  t.values = std::move(v);
  return t;
}

void Tensor::alloc_grad() {
  if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
}

void Tensor::zero_grad() { grad.assign(values.size(), 0.0); }

bool Tensor::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

RngState::RngState(std::uint64_t seed)
    : seed_(seed), algorithm_("mt19937_64-raw53"), engine_(seed) {}

std::uint64_t RngState::next_u64() { return engine_(); }

double RngState::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngState::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

std::size_t RngState::below(std::size_t n) {
  if (n == 0) throw std::invalid_argument("RngState::below: n must be positive");
  // modulo rejection keeps the draw unbiased
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t u;
  do {
    u = next_u64();
  } while (u >= limit);
  return static_cast<std::size_t>(u % n);
}

}  // namespace drs
