#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "drs/tensor.hpp"

namespace drs {

// Named parameter block. The grad buffer accumulates across backward passes
// until zero_grad(); frozen blocks never receive gradient.
struct Parameter {
  std::string name;
  Tensor value;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string name_, Tensor value_, bool trainable_ = true)
      : name(std::move(name_)), value(std::move(value_)), trainable(trainable_) {
    value.alloc_grad();
  }

  void zero_grad() { value.zero_grad(); }
};

struct Var {
  std::int32_t id = -1;
  bool valid() const { return id >= 0; }
};

// Append-only reverse-mode tape. Ops evaluate eagerly and record a backward
// closure; creation order is a topological order, so backward() is a single
// reverse sweep. One tape per forward pass, discarded afterwards.
class Tape {
 public:
  Var leaf(Tensor v);                    // constant, no gradient flow
  Var param(Parameter& p);               // cached; grads flow to p.value.grad
  Var embedding_row(Parameter& table, std::size_t row);

  Var concat(std::span<const Var> parts);
  Var concat(Var a, Var b);
  Var add(Var a, Var b);
  Var mul(Var a, Var b);                 // elementwise
  Var caffine(Var a, double alpha, double beta);  // alpha*x + beta, elementwise
  Var cmul(Var a, double c) { return caffine(a, c, 0.0); }
  Var sigmoid(Var a);
  Var tanh_(Var a);
  Var relu(Var a);
  Var matvec(Var w, Var x);              // (m x n) * (n) -> (m)
  Var bilinear(Var w, Var a, Var b);     // (m x k x n), (m), (n) -> (k)
  Var dot(Var a, Var b);                 // -> scalar
  Var sum(Var a);                        // -> scalar
  Var pick(Var v, std::size_t i);        // -> scalar
  Var scale(Var v, Var s);               // vector * scalar
  Var div_by(Var v, Var s);              // vector / scalar
  Var stack(std::span<const Var> scalars);
  Var softmax(Var scores);
  Var nll(Var scores, std::size_t gold); // -log softmax(scores)[gold]
  Var dropout(Var v, double rate, RngState& rng);  // inverted; fixed mask

  const Tensor& value(Var v) const;
  double scalar_value(Var v) const;
  std::span<const double> grad_of(Var v) const;  // valid after backward()

  void backward(Var scalar_loss);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    std::function<void(Tape&, std::int32_t)> back;  // empty for constants
    Parameter* param = nullptr;
  };

  Var push(Tensor value, std::function<void(Tape&, std::int32_t)> back);
  Node& node(Var v) { return nodes_[static_cast<std::size_t>(v.id)]; }
  const Node& node(Var v) const { return nodes_[static_cast<std::size_t>(v.id)]; }
  std::vector<double>& grad(std::int32_t id) { return nodes_[static_cast<std::size_t>(id)].grad; }
  const std::vector<double>& vals(std::int32_t id) const {
    return nodes_[static_cast<std::size_t>(id)].value.values;
  }
  void check_vector(Var v, const char* op, const char* operand) const;
  void check_same_len(Var a, Var b, const char* op) const;

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::int32_t> param_cache_;
};

}  // namespace drs
