#include "drs/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drs {

namespace {

std::runtime_error shape_error(const std::string& op, const std::string& operand,
                               const std::string& expected, const std::string& got) {
  return std::runtime_error(op + ": operand '" + operand + "' has shape " + got +
                            ", expected " + expected);
}

}  // namespace

Var Tape::push(Tensor value, std::function<void(Tape&, std::int32_t)> back) {
  Node n;
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Tape::leaf(Tensor v) { return push(std::move(v), nullptr); }

Var Tape::param(Parameter& p) {
  auto it = param_cache_.find(&p);
  if (it != param_cache_.end()) return Var{it->second};
  Var v = push(p.value, nullptr);
  Node& n = node(v);
  n.value.grad.clear();
  n.param = &p;
  if (p.trainable) {
    n.back = [](Tape& t, std::int32_t self) {
      Node& s = t.nodes_[static_cast<std::size_t>(self)];
      s.param->value.alloc_grad();
      auto& pg = s.param->value.grad;
      for (std::size_t i = 0; i < s.grad.size(); ++i) pg[i] += s.grad[i];
    };
  }
  param_cache_.emplace(&p, v.id);
  return v;
}

Var Tape::embedding_row(Parameter& table, std::size_t row) {
  if (table.value.rank() != 2) {
    throw shape_error("embedding_row", table.name, "(rows, dim)", shape_str(table.value.shape));
  }
  const std::size_t dim = table.value.shape[1];
  if (row >= table.value.shape[0]) {
    throw std::runtime_error("embedding_row: row " + std::to_string(row) +
                             " out of range for '" + table.name + "' with " +
                             std::to_string(table.value.shape[0]) + " rows");
  }
  Tensor out = Tensor::zeros({dim});
  const double* src = table.value.values.data() + row * dim;
  std::copy(src, src + dim, out.values.begin());
  if (!table.trainable) return leaf(std::move(out));
  Parameter* tp = &table;
  return push(std::move(out), [tp, row, dim](Tape& t, std::int32_t self) {
    tp->value.alloc_grad();
    const auto& g = t.grad(self);
    double* dst = tp->value.grad.data() + row * dim;
    for (std::size_t i = 0; i < dim; ++i) dst[i] += g[i];
  });
}

void Tape::check_vector(Var v, const char* op, const char* operand) const {
  if (node(v).value.rank() != 1) {
    throw shape_error(op, operand, "(n)", shape_str(node(v).value.shape));
  }
}

void Tape::check_same_len(Var a, Var b, const char* op) const {
  check_vector(a, op, "lhs");
  check_vector(b, op, "rhs");
  if (node(a).value.numel() != node(b).value.numel()) {
    throw shape_error(op, "rhs", shape_str(node(a).value.shape), shape_str(node(b).value.shape));
  }
}

Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw std::runtime_error("concat: no operands");
  std::size_t total = 0;
  for (Var p : parts) {
    check_vector(p, "concat", "part");
    total += node(p).value.numel();
  }
  Tensor out = Tensor::zeros({total});
  std::size_t off = 0;
  for (Var p : parts) {
    const auto& v = vals(p.id);
    std::copy(v.begin(), v.end(), out.values.begin() + off);
    off += v.size();
  }
  std::vector<std::int32_t> ids(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) ids[i] = parts[i].id;
  return push(std::move(out), [ids](Tape& t, std::int32_t self) {
    const auto& g = t.grad(self);
    std::size_t off = 0;
    for (std::int32_t id : ids) {
      auto& ig = t.grad(id);
      for (std::size_t i = 0; i < ig.size(); ++i) ig[i] += g[off + i];
      off += ig.size();
    }
  });
}

Var Tape::concat(Var a, Var b) {
  const Var parts[2] = {a, b};
  return concat(std::span<const Var>(parts, 2));
}

Var Tape::add(Var a, Var b) {
  check_same_len(a, b, "add");
  const auto& va = vals(a.id);
  const auto& vb = vals(b.id);
  Tensor out = Tensor::zeros({va.size()});
  for (std::size_t i = 0; i < va.size(); ++i) out.values[i] = va[i] + vb[i];
  return push(std::move(out), [a, b](Tape& t, std::int32_t self) {
    const auto& g = t.grad(self);
    auto& ga = t.grad(a.id);
    auto& gb = t.grad(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  check_same_len(a, b, "mul");
  const auto& va = vals(a.id);
  const auto& vb = vals(b.id);
  Tensor out = Tensor::zeros({va.size()});
  for (std::size_t i = 0; i < va.size(); ++i) out.values[i] = va[i] * vb[i];
  return push(std::move(out), [a, b](Tape& t, std::int32_t self) {
    const auto& g = t.grad(self);
    const auto& va = t.vals(a.id);
    const auto& vb = t.vals(b.id);
    auto& ga = t.grad(a.id);
    auto& gb = t.grad(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * vb[i];
      gb[i] += g[i] * va[i];
    }
  });
}

Var Tape::caffine(Var a, double alpha, double beta) {
  const auto& va = vals(a.id);
  Tensor out = node(a).value;
  for (auto& v : out.values) v = alpha * v + beta;
  (void)va;
  return push(std::move(out), [a, alpha](Tape& t, std::int32_t self) {
    const auto& g = t.grad(self);
    auto& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += alpha * g[i];
  });
}

Var Tape::sigmoid(Var a) {
  Tensor out = node(a).value;
  for (auto& v : out.values) v = 1.0 / (1.0 + std::exp(-v));
  return push(std::move(out), [a](Tape& t, std::int32_t self) {
    const auto& g = t.grad(self);
    const auto& y = t.vals(self);
    auto& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var Tape::tanh_(Var a) {
  Tensor out = node(a).value;
  for (auto& v : out.values) v = std::tanh(v);
  return push(std::move(out), [a](Tape& t, std::int32_t self) {
    const auto& g = t.grad(self);
    const auto& y = t.vals(self);
    auto& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var Tape::relu(Var a) {
  Tensor out = node(a).value;
  for (auto& v : out.values) v = v > 0.0 ? v : 0.0;
  return push(std::move(out), [a](Tape& t, std::int32_t self) {
    const auto& g = t.grad(self);
    const auto& x = t.vals(a.id);
    auto& ga = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > 0.0) ga[i] += g[i];
    }
  });
}

Var Tape::matvec(Var w, Var x) {
  const Tensor& tw = node(w).value;
  check_vector(x, "matvec", "x");
  if (tw.rank() != 2) throw shape_error("matvec", "w", "(m, n)", shape_str(tw.shape));
  const std::size_t m = tw.shape[0], n = tw.shape[1];
  if (node(x).value.numel() != n) {
    throw shape_error("matvec", "x", "(" + std::to_string(n) + ")",
                      shape_str(node(x).value.shape));
  }
  const auto& vx = vals(x.id);
  Tensor out = Tensor::zeros({m});
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* row = tw.values.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * vx[j];
    out.values[i] = acc;
  }
  return push(std::move(out), [w, x, m, n](Tape& t, std::int32_t self) {
    const auto& g = t.grad(self);
    const auto& vw = t.vals(w.id);
    const auto& vx = t.vals(x.id);
    auto& gw = t.grad(w.id);
    auto& gx = t.grad(x.id);
    for (std::size_t i = 0; i < m; ++i) {
      const double gi = g[i];
      const double* row = vw.data() + i * n;
      double* grow = gw.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        grow[j] += gi * vx[j];
        gx[j] += gi * row[j];
      }
    }
  });
}

Var Tape::bilinear(Var w, Var a, Var b) {
  const Tensor& tw = node(w).value;
  if (tw.rank() != 3) throw shape_error("bilinear", "w", "(m, k, n)", shape_str(tw.shape));
  const std::size_t m = tw.shape[0], k = tw.shape[1], n = tw.shape[2];
  check_vector(a, "bilinear", "a");
  check_vector(b, "bilinear", "b");
  if (node(a).value.numel() != m) {
    throw shape_error("bilinear", "a", "(" + std::to_string(m) + ")",
                      shape_str(node(a).value.shape));
  }
  if (node(b).value.numel() != n) {
    throw shape_error("bilinear", "b", "(" + std::to_string(n) + ")",
                      shape_str(node(b).value.shape));
  }
  const auto& va = vals(a.id);
  const auto& vb = vals(b.id);
  Tensor out = Tensor::zeros({k});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      const double* row = tw.values.data() + (i * k + c) * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * vb[j];
      out.values[c] += va[i] * acc;
    }
  }
  return push(std::move(out), [w, a, b, m, k, n](Tape& t, std::int32_t self) {
    const auto& g = t.grad(self);
    const auto& vw = t.vals(w.id);
    const auto& va = t.vals(a.id);
    const auto& vb = t.vals(b.id);
    auto& gw = t.grad(w.id);
    auto& ga = t.grad(a.id);
    auto& gb = t.grad(b.id);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < k; ++c) {
        const double gc = g[c];
        if (gc == 0.0) continue;
        const std::size_t base = (i * k + c) * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          gw[base + j] += gc * va[i] * vb[j];
          gb[j] += gc * va[i] * vw[base + j];
          acc += vw[base + j] * vb[j];
        }
        ga[i] += gc * acc;
      }
    }
  });
}

Var Tape::dot(Var a, Var b) {
  check_same_len(a, b, "dot");
  const auto& va = vals(a.id);
  const auto& vb = vals(b.id);
  double acc = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) acc += va[i] * vb[i];
  return push(Tensor::scalar(acc), [a, b](Tape& t, std::int32_t self) {
    const double g = t.grad(self)[0];
    const auto& va = t.vals(a.id);
    const auto& vb = t.vals(b.id);
    auto& ga = t.grad(a.id);
    auto& gb = t.grad(b.id);
    for (std::size_t i = 0; i < va.size(); ++i) {
      ga[i] += g * vb[i];
      gb[i] += g * va[i];
    }
  });
}

Var Tape::sum(Var a) {
  const auto& va = vals(a.id);
  double acc = 0.0;
  for (double v : va) acc += v;
  return push(Tensor::scalar(acc), [a](Tape& t, std::int32_t self) {
    const double g = t.grad(self)[0];
    auto& ga = t.grad(a.id);
    for (auto& v : ga) v += g;
  });
}

Var Tape::pick(Var v, std::size_t i) {
  check_vector(v, "pick", "v");
  if (i >= node(v).value.numel()) {
    throw std::runtime_error("pick: index " + std::to_string(i) + " out of range for shape " +
                             shape_str(node(v).value.shape));
  }
  return push(Tensor::scalar(vals(v.id)[i]), [v, i](Tape& t, std::int32_t self) {
    t.grad(v.id)[i] += t.grad(self)[0];
  });
}

Var Tape::scale(Var v, Var s) {
  check_vector(v, "scale", "v");
  if (node(s).value.numel() != 1) {
    throw shape_error("scale", "s", "(1)", shape_str(node(s).value.shape));
  }
  const double sv = vals(s.id)[0];
  Tensor out = node(v).value;
  for (auto& x : out.values) x *= sv;
  return push(std::move(out), [v, s](Tape& t, std::int32_t self) {
    const auto& g = t.grad(self);
    const auto& vv = t.vals(v.id);
    const double sv = t.vals(s.id)[0];
    auto& gv = t.grad(v.id);
    auto& gs = t.grad(s.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      gv[i] += g[i] * sv;
      gs[0] += g[i] * vv[i];
    }
  });
}

Var Tape::div_by(Var v, Var s) {
  check_vector(v, "div_by", "v");
  if (node(s).value.numel() != 1) {
    throw shape_error("div_by", "s", "(1)", shape_str(node(s).value.shape));
  }
  const double sv = vals(s.id)[0];
  if (sv == 0.0) throw std::runtime_error("div_by: divisor is zero");
  Tensor out = node(v).value;
  for (auto& x : out.values) x /= sv;
  return push(std::move(out), [v, s](Tape& t, std::int32_t self) {
    const auto& g = t.grad(self);
    const auto& y = t.vals(self);
    const double sv = t.vals(s.id)[0];
    auto& gv = t.grad(v.id);
    auto& gs = t.grad(s.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      gv[i] += g[i] / sv;
      gs[0] -= g[i] * y[i] / sv;
    }
  });
}

Var Tape::stack(std::span<const Var> scalars) {
  if (scalars.empty()) throw std::runtime_error("stack: no operands");
  Tensor out = Tensor::zeros({scalars.size()});
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    if (node(scalars[i]).value.numel() != 1) {
      throw shape_error("stack", "element " + std::to_string(i), "(1)",
                        shape_str(node(scalars[i]).value.shape));
    }
    out.values[i] = vals(scalars[i].id)[0];
  }
  std::vector<std::int32_t> ids(scalars.size());
  for (std::size_t i = 0; i < scalars.size(); ++i) ids[i] = scalars[i].id;
  return push(std::move(out), [ids](Tape& t, std::int32_t self) {
    const auto& g = t.grad(self);
    for (std::size_t i = 0; i < ids.size(); ++i) t.grad(ids[i])[0] += g[i];
  });
}

Var Tape::softmax(Var scores) {
  check_vector(scores, "softmax", "scores");
  const auto& s = vals(scores.id);
  Tensor out = Tensor::zeros({s.size()});
  const double mx = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.values[i] = std::exp(s[i] - mx);
    z += out.values[i];
  }
  for (auto& p : out.values) p /= z;
  return push(std::move(out), [scores](Tape& t, std::int32_t self) {
    const auto& g = t.grad(self);
    const auto& p = t.vals(self);
    auto& gs = t.grad(scores.id);
    double gp = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) gp += g[i] * p[i];
    for (std::size_t i = 0; i < g.size(); ++i) gs[i] += p[i] * (g[i] - gp);
  });
}

Var Tape::nll(Var scores, std::size_t gold) {
  check_vector(scores, "nll", "scores");
  const auto& s = vals(scores.id);
  if (gold >= s.size()) {
    throw std::runtime_error("nll: gold index " + std::to_string(gold) +
                             " out of range for " + std::to_string(s.size()) + " scores");
  }
  const double mx = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (double v : s) z += std::exp(v - mx);
  const double loss = -(s[gold] - mx - std::log(z));
  return push(Tensor::scalar(loss), [scores, gold, mx, z](Tape& t, std::int32_t self) {
    const double g = t.grad(self)[0];
    const auto& s = t.vals(scores.id);
    auto& gs = t.grad(scores.id);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double p = std::exp(s[i] - mx) / z;
      gs[i] += g * (p - (i == gold ? 1.0 : 0.0));
    }
  });
}

Var Tape::dropout(Var v, double rate, RngState& rng) {
  check_vector(v, "dropout", "v");
  if (rate < 0.0 || rate >= 1.0) {
    throw std::runtime_error("dropout: rate " + std::to_string(rate) + " outside [0, 1)");
  }
  if (rate == 0.0) return v;
  const auto& x = vals(v.id);
  const double keep = 1.0 - rate;
  std::vector<double> mask(x.size());
  for (auto& m : mask) m = rng.uniform() < rate ? 0.0 : 1.0 / keep;
  Tensor out = Tensor::zeros({x.size()});
  for (std::size_t i = 0; i < x.size(); ++i) out.values[i] = x[i] * mask[i];
  return push(std::move(out), [v, mask = std::move(mask)](Tape& t, std::int32_t self) {
    const auto& g = t.grad(self);
    auto& gv = t.grad(v.id);
    for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i] * mask[i];
  });
}

const Tensor& Tape::value(Var v) const {
  if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw std::runtime_error("Tape::value: invalid Var");
  }
  return node(v).value;
}

double Tape::scalar_value(Var v) const {
  const Tensor& t = value(v);
  if (t.numel() != 1) {
    throw std::runtime_error("Tape::scalar_value: shape " + shape_str(t.shape) + " is not scalar");
  }
  return t.values[0];
}

std::span<const double> Tape::grad_of(Var v) const {
  const Node& n = node(v);
  return {n.grad.data(), n.grad.size()};
}

void Tape::backward(Var scalar_loss) {
  if (value(scalar_loss).numel() != 1) {
    throw std::runtime_error("Tape::backward: loss must be scalar, got shape " +
                             shape_str(value(scalar_loss).shape));
  }
  for (auto& n : nodes_) n.grad.assign(n.value.numel(), 0.0);
  node(scalar_loss).grad[0] = 1.0;
  for (std::int32_t i = static_cast<std::int32_t>(nodes_.size()) - 1; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.back) n.back(*this, i);
  }
}

}  // namespace drs
