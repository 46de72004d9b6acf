#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace drs {

std::size_t shape_numel(const std::vector<std::size_t>& shape);
std::string shape_str(const std::vector<std::size_t>& shape);

// Dense row-major tensor of 64-bit floats with an optional gradient buffer
// of the same length.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty, or values.size() entries

  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor scalar(double v);
  static Tensor vec(std::vector<double> v);

  std::size_t numel() const { return values.size(); }
  std::size_t rank() const { return shape.size(); }
  bool has_grad() const { return !grad.empty(); }
  void alloc_grad();
  void zero_grad();
  bool all_finite() const;

  double& at(std::size_t i) { return values[i]; }
  double at(std::size_t i) const { return values[i]; }
  double& at(std::size_t i, std::size_t j) { return values[i * shape[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * shape[1] + j]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return values[(i * shape[1] + j) * shape[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return values[(i * shape[1] + j) * shape[2] + k];
  }
};

// Deterministic random source. Only the engine's raw 64-bit output is used
// (never std distributions, whose streams are implementation defined), so
// identical seeds give identical draws everywhere.
class RngState {
 public:
  explicit RngState(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();                       // [0, 1), 53-bit
  double uniform(double lo, double hi);
  std::size_t below(std::size_t n);       // unbiased draw from [0, n)

  std::uint64_t seed() const { return seed_; }
  const std::string& algorithm() const { return algorithm_; }

 private:
  std::uint64_t seed_;
  std::string algorithm_;
  std::mt19937_64 engine_;
};

}  // namespace drs
