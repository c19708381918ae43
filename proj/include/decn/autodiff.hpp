// Copyright 2026 The DECN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DECN_AUTODIFF_HPP
#define DECN_AUTODIFF_HPP

// Reverse-mode differentiation over a small, fixed set of tensor primitives.
//
// A Var is an immutable tensor value that may additionally be recorded on a
// Tape. Operations whose inputs are all untaped record nothing and simply
// return constants, so the same code path serves training and inference.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "decn/error.hpp"
#include "decn/tensor.hpp"

namespace decn {

class Tape;

class Var {
 public:
  Var() = default;
  explicit Var(Tensor value)
      : value_(std::make_shared<const Tensor>(std::move(value))) {}

  const Tensor& value() const { return *value_; }
  const Shape& shape() const { return value_->shape(); }
  bool defined() const { return value_ != nullptr; }
  bool on_tape() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::size_t node() const { return node_; }

  /// Same value, no longer connected to any tape.
  Var detach() const {
    Var v;
    v.value_ = value_;
    return v;
  }

 private:
  friend class Tape;
  std::shared_ptr<const Tensor> value_;
  Tape* tape_ = nullptr;
  std::size_t node_ = 0;
};

/// Accumulates the gradient of one node into the buffers of its inputs.
/// A null entry marks an input that needs no gradient.
using Backward =
    std::function<void(const Tensor& grad_out, std::span<Tensor* const> grads)>;

/// Append-only record of operations; nodes are stored in recording order,
/// which is a valid topological order.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value) {
    Var v(std::move(value));
    v.tape_ = this;
    v.node_ = nodes_.size();
    nodes_.push_back(Node{v.value_, {}, nullptr, true});
    return v;
  }

  Var record(Tensor value, std::vector<std::size_t> inputs, Backward backward) {
    Var v(std::move(value));
    v.tape_ = this;
    v.node_ = nodes_.size();
    nodes_.push_back(Node{v.value_, std::move(inputs), std::move(backward), false});
    return v;
  }

  std::size_t size() const { return nodes_.size(); }

  /// d(output)/d(param) for each param. The output must hold one value.
  std::vector<Tensor> grad(const Var& output, std::span<const Var> params) const {
    if (output.tape() != this) {
      throw UnknownLeafError("output was not recorded on this tape");
    }
    if (output.value().size() != 1) {
      throw ShapeError("grad() needs a scalar output, got shape " +
                       output.shape().str());
    }
    for (const Var& p : params) {
      if (p.tape() != this || !nodes_[p.node()].leaf) {
        throw UnknownLeafError("parameter is not a leaf of this tape");
      }
    }

    std::vector<Tensor> grads(output.node() + 1);
    grads[output.node()] = Tensor(output.shape(), 1.0);
    std::vector<Tensor*> slots;
    for (std::size_t n = output.node() + 1; n-- > 0;) {
      const Node& node = nodes_[n];
      if (grads[n].empty() || node.leaf || !node.backward) continue;
      slots.assign(node.inputs.size(), nullptr);
      for (std::size_t i = 0; i < node.inputs.size(); ++i) {
        const std::size_t in = node.inputs[i];
        if (in == kConstant) continue;
        if (grads[in].empty()) grads[in] = Tensor(nodes_[in].value->shape(), 0.0);
        slots[i] = &grads[in];
      }
      node.backward(grads[n], slots);
    }

    std::vector<Tensor> out;
    out.reserve(params.size());
    for (const Var& p : params) {
      if (p.node() < grads.size() && !grads[p.node()].empty()) {
        out.push_back(grads[p.node()]);
      } else {
        out.emplace_back(p.shape(), 0.0);
      }
    }
    return out;
  }

  static constexpr std::size_t kConstant = std::numeric_limits<std::size_t>::max();

 private:
  struct Node {
    std::shared_ptr<const Tensor> value;
    std::vector<std::size_t> inputs;
    Backward backward;
    bool leaf;
  };
  std::vector<Node> nodes_;
};

namespace detail {

inline Tape* common_tape(std::initializer_list<const Var*> inputs) {
  Tape* tape = nullptr;
  for (const Var* v : inputs) {
    if (!v->on_tape()) continue;
    if (tape && tape != v->tape()) {
      throw Error("operands are recorded on different tapes");
    }
    tape = v->tape();
  }
  return tape;
}

inline void require_finite(const Tensor& t, const char* op) {
  if (!t.all_finite()) {
    throw NumericError(std::string(op) + " produced a non-finite value");
  }
}

/// Records `value` on the common tape of `inputs`, or returns a constant.
inline Var emit(const char* op, Tensor value, std::initializer_list<const Var*> inputs,
                Backward backward) {
  require_finite(value, op);
  Tape* tape = common_tape(inputs);
  if (!tape) return Var(std::move(value));
  std::vector<std::size_t> ids;
  ids.reserve(inputs.size());
  for (const Var* v : inputs) ids.push_back(v->on_tape() ? v->node() : Tape::kConstant);
  return tape->record(std::move(value), std::move(ids), std::move(backward));
}

/// Symmetric extension: index -1 maps to 0, -2 to 1, n to n-1, and so on.
inline std::size_t symmetric_index(std::ptrdiff_t i, std::size_t n) {
  const auto period = static_cast<std::ptrdiff_t>(2 * n);
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(n)) m = period - 1 - m;
  return static_cast<std::size_t>(m);
}

inline std::size_t cell_count(const Shape& s) { return s[0] * s[1]; }
inline std::size_t cell_width(const Shape& s) { return s.rank() == 3 ? s[2] : 1; }

inline void require_lattice(const Shape& s, const char* op) {
  if (s.rank() < 2) {
    throw ShapeError(std::string(op) + ": expected a lattice, got shape " + s.str());
  }
}

}  // namespace detail

inline Var add(const Var& a, const Var& b) {
  Tensor::require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  out += b.value();
  return detail::emit("add", std::move(out), {&a, &b},
                      [](const Tensor& g, std::span<Tensor* const> grads) {
                        for (Tensor* t : grads) {
                          if (t) *t += g;
                        }
                      });
}

inline Var sub(const Var& a, const Var& b) {
  Tensor::require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return detail::emit("sub", std::move(out), {&a, &b},
                      [](const Tensor& g, std::span<Tensor* const> grads) {
                        if (grads[0]) *grads[0] += g;
                        if (grads[1]) {
                          for (std::size_t i = 0; i < g.size(); ++i) (*grads[1])[i] -= g[i];
                        }
                      });
}

inline Var mul(const Var& a, const Var& b) {
  Tensor::require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  auto av = a, bv = b;
  return detail::emit("mul", std::move(out), {&a, &b},
                      [av, bv](const Tensor& g, std::span<Tensor* const> grads) {
                        for (std::size_t i = 0; i < g.size(); ++i) {
                          if (grads[0]) (*grads[0])[i] += g[i] * bv.value()[i];
                          if (grads[1]) (*grads[1])[i] += g[i] * av.value()[i];
                        }
                      });
}

inline Var scale(const Var& a, double s) {
  Tensor out = a.value();
  out *= s;
  return detail::emit("scale", std::move(out), {&a},
                      [s](const Tensor& g, std::span<Tensor* const> grads) {
                        for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += s * g[i];
                      });
}

inline Var add_scalar(const Var& a, double s) {
  Tensor out = a.value();
  for (double& v : out.data()) v += s;
  return detail::emit("add_scalar", std::move(out), {&a},
                      [](const Tensor& g, std::span<Tensor* const> grads) {
                        *grads[0] += g;
                      });
}

inline Var sum(const Var& a) {
  return detail::emit("sum", Tensor::scalar(a.value().sum()), {&a},
                      [](const Tensor& g, std::span<Tensor* const> grads) {
                        for (double& v : grads[0]->data()) v += g[0];
                      });
}

inline Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  return detail::emit("mean", Tensor::scalar(a.value().sum() / n), {&a},
                      [n](const Tensor& g, std::span<Tensor* const> grads) {
                        for (double& v : grads[0]->data()) v += g[0] / n;
                      });
}

/// |x| with subgradient 0 at exactly 0.
inline Var abs(const Var& a) {
  Tensor out = a.value();
  for (double& v : out.data()) v = std::abs(v);
  auto av = a;
  return detail::emit("abs", std::move(out), {&a},
                      [av](const Tensor& g, std::span<Tensor* const> grads) {
                        const Tensor& x = av.value();
                        for (std::size_t i = 0; i < g.size(); ++i) {
                          const double s = x[i] > 0 ? 1.0 : (x[i] < 0 ? -1.0 : 0.0);
                          (*grads[0])[i] += s * g[i];
                        }
                      });
}

/// Depthwise 2-D convolution of an (L, L, C) lattice with a single k x k
/// kernel shared by every channel. The border is extended symmetrically
/// (cell -1 is a copy of cell 0), so the output has the input's extent:
///
///   out(i, j, c) = sum_{a,b} kernel(a, b) * in(sym(i + a - p), sym(j + b - p), c)
///
/// with p = (k - 1) / 2.
inline Var depthwise_conv2d(const Var& input, const Var& kernel) {
  const Shape& xs = input.shape();
  const Shape& ks = kernel.shape();
  if (xs.rank() != 3) {
    throw ShapeError("depthwise_conv2d: input must be (L, L, C), got " + xs.str());
  }
  if (ks.rank() != 2 || ks[0] != ks[1]) {
    throw InvalidKernelError("depthwise_conv2d: kernel must be square, got " + ks.str());
  }
  const std::size_t k = ks[0];
  if (k % 2 == 0) {
    throw InvalidKernelError("depthwise_conv2d: kernel size must be odd, got " +
                             std::to_string(k));
  }
  const std::size_t rows = xs[0], cols = xs[1], ch = xs[2];
  // A 1x1 lattice pads by tiling its single cell, which is defined for any k.
  const bool single_cell = rows == 1 && cols == 1;
  if (!single_cell && (k > 2 * rows - 1 || k > 2 * cols - 1)) {
    throw PaddingOverflowError("depthwise_conv2d: kernel " + std::to_string(k) +
                               " exceeds 2L-1 for lattice " + xs.str());
  }
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);

  // Source cell for each (output row/col, tap) pair.
  auto row_map = std::make_shared<std::vector<std::size_t>>(rows * k);
  auto col_map = std::make_shared<std::vector<std::size_t>>(cols * k);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      (*row_map)[i * k + a] = detail::symmetric_index(
          static_cast<std::ptrdiff_t>(i + a) - pad, rows);
    }
  }
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t b = 0; b < k; ++b) {
      (*col_map)[j * k + b] = detail::symmetric_index(
          static_cast<std::ptrdiff_t>(j + b) - pad, cols);
    }
  }

  const Tensor& x = input.value();
  const Tensor& w = kernel.value();
  Tensor out(xs, 0.0);
  const double* xd = x.data().data();
  double* od = out.data().data();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double* o = od + (i * cols + j) * ch;
      for (std::size_t a = 0; a < k; ++a) {
        const std::size_t r = (*row_map)[i * k + a];
        for (std::size_t b = 0; b < k; ++b) {
          const double wv = w[a * k + b];
          const double* src = xd + (r * cols + (*col_map)[j * k + b]) * ch;
          for (std::size_t c = 0; c < ch; ++c) o[c] += wv * src[c];
        }
      }
    }
  }

  auto xv = input, wv = kernel;
  return detail::emit(
      "depthwise_conv2d", std::move(out), {&input, &kernel},
      [xv, wv, row_map, col_map, rows, cols, ch, k](const Tensor& g,
                                                    std::span<Tensor* const> grads) {
        const double* gd = g.data().data();
        const double* xd = xv.value().data().data();
        const Tensor& w = wv.value();
        Tensor* gx = grads[0];
        Tensor* gw = grads[1];
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t j = 0; j < cols; ++j) {
            const double* go = gd + (i * cols + j) * ch;
            for (std::size_t a = 0; a < k; ++a) {
              const std::size_t r = (*row_map)[i * k + a];
              for (std::size_t b = 0; b < k; ++b) {
                const std::size_t src = (r * cols + (*col_map)[j * k + b]) * ch;
                if (gx) {
                  const double wt = w[a * k + b];
                  double* gi = gx->data().data() + src;
                  for (std::size_t c = 0; c < ch; ++c) gi[c] += wt * go[c];
                }
                if (gw) {
                  double acc = 0.0;
                  for (std::size_t c = 0; c < ch; ++c) acc += go[c] * xd[src + c];
                  (*gw)[a * k + b] += acc;
                }
              }
            }
          }
        }
      });
}

/// Zero-pads a k x k kernel to size x size, keeping it centred.
inline Var embed_kernel(const Var& kernel, std::size_t size) {
  const Shape& ks = kernel.shape();
  if (ks.rank() != 2 || ks[0] != ks[1] || ks[0] % 2 == 0) {
    throw InvalidKernelError("embed_kernel: kernel must be square and odd, got " + ks.str());
  }
  const std::size_t k = ks[0];
  if (size < k || size % 2 == 0) {
    throw InvalidKernelError("embed_kernel: target size " + std::to_string(size) +
                             " cannot hold kernel " + std::to_string(k));
  }
  const std::size_t off = (size - k) / 2;
  Tensor out(Shape{size, size}, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) out[(a + off) * size + b + off] = kernel.value()[a * k + b];
  }
  return detail::emit("embed_kernel", std::move(out), {&kernel},
                      [k, size, off](const Tensor& g, std::span<Tensor* const> grads) {
                        for (std::size_t a = 0; a < k; ++a) {
                          for (std::size_t b = 0; b < k; ++b) {
                            (*grads[0])[a * k + b] += g[(a + off) * size + b + off];
                          }
                        }
                      });
}

/// Clamps each value of an (L, L, C) lattice into [lower[c], upper[c]].
/// Values that were clamped receive zero gradient.
inline Var clamp(const Var& input, std::span<const double> lower,
                 std::span<const double> upper) {
  const Shape& s = input.shape();
  detail::require_lattice(s, "clamp");
  const std::size_t ch = detail::cell_width(s);
  if (lower.size() != ch || upper.size() != ch) {
    throw ShapeError("clamp: bounds length does not match channel count");
  }
  Tensor out = input.value();
  auto active = std::make_shared<std::vector<std::uint8_t>>(out.size(), 1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t c = i % ch;
    if (out[i] < lower[c]) {
      out[i] = lower[c];
      (*active)[i] = 0;
    } else if (out[i] > upper[c]) {
      out[i] = upper[c];
      (*active)[i] = 0;
    }
  }
  return detail::emit("clamp", std::move(out), {&input},
                      [active](const Tensor& g, std::span<Tensor* const> grads) {
                        for (std::size_t i = 0; i < g.size(); ++i) {
                          if ((*active)[i]) (*grads[0])[i] += g[i];
                        }
                      });
}

/// Permutes the cells of a lattice: out cell `d` is input cell `perm[d]`
/// (cells in row-major order). The permutation is a constant in backward.
inline Var gather_cells(const Var& input, std::vector<std::size_t> perm) {
  const Shape& s = input.shape();
  detail::require_lattice(s, "gather_cells");
  const std::size_t cells = detail::cell_count(s);
  const std::size_t width = detail::cell_width(s);
  if (perm.size() != cells) throw ShapeError("gather_cells: permutation length mismatch");
  Tensor out(s, 0.0);
  for (std::size_t d = 0; d < cells; ++d) {
    if (perm[d] >= cells) throw ShapeError("gather_cells: index out of range");
    for (std::size_t c = 0; c < width; ++c) {
      out[d * width + c] = input.value()[perm[d] * width + c];
    }
  }
  auto p = std::make_shared<std::vector<std::size_t>>(std::move(perm));
  return detail::emit("gather_cells", std::move(out), {&input},
                      [p, width](const Tensor& g, std::span<Tensor* const> grads) {
                        for (std::size_t d = 0; d < p->size(); ++d) {
                          for (std::size_t c = 0; c < width; ++c) {
                            (*grads[0])[(*p)[d] * width + c] += g[d * width + c];
                          }
                        }
                      });
}

/// Cellwise choice: out cell = mask ? a : b. The mask is a constant in
/// backward; gradient flows only to the chosen operand.
inline Var select_cells(std::vector<std::uint8_t> mask, const Var& a, const Var& b) {
  Tensor::require_same_shape(a.value(), b.value(), "select_cells");
  const Shape& s = a.shape();
  detail::require_lattice(s, "select_cells");
  const std::size_t cells = detail::cell_count(s);
  const std::size_t width = detail::cell_width(s);
  if (mask.size() != cells) throw ShapeError("select_cells: mask length mismatch");
  Tensor out = b.value();
  for (std::size_t d = 0; d < cells; ++d) {
    if (!mask[d]) continue;
    for (std::size_t c = 0; c < width; ++c) out[d * width + c] = a.value()[d * width + c];
  }
  auto m = std::make_shared<std::vector<std::uint8_t>>(std::move(mask));
  return detail::emit("select_cells", std::move(out), {&a, &b},
                      [m, width](const Tensor& g, std::span<Tensor* const> grads) {
                        for (std::size_t d = 0; d < m->size(); ++d) {
                          Tensor* t = (*m)[d] ? grads[0] : grads[1];
                          if (!t) continue;
                          for (std::size_t c = 0; c < width; ++c) {
                            (*t)[d * width + c] += g[d * width + c];
                          }
                        }
                      });
}

/// Scalar function of one cell's channel vector. When `grad` is non-empty
/// it must be filled with the gradient at `x`.
using CellFunction = std::function<double(std::span<const double> x, std::span<double> grad)>;

/// Applies `fn` to every cell of an (L, L, C) lattice, producing (L, L).
inline Var map_cells(const Var& input, const CellFunction& fn) {
  const Shape& s = input.shape();
  if (s.rank() != 3) throw ShapeError("map_cells: input must be (L, L, C), got " + s.str());
  const std::size_t rows = s[0], cols = s[1], ch = s[2];
  const bool taped = input.on_tape();
  Tensor out(Shape{rows, cols}, 0.0);
  auto jac = std::make_shared<Tensor>();
  if (taped) *jac = Tensor(s, 0.0);
  const auto x = input.value().data();
  for (std::size_t cell = 0; cell < rows * cols; ++cell) {
    std::span<double> g;
    if (taped) g = jac->data().subspan(cell * ch, ch);
    const double v = fn(x.subspan(cell * ch, ch), g);
    if (!std::isfinite(v)) {
      throw NumericError("non-finite fitness at cell (" + std::to_string(cell / cols) +
                         ", " + std::to_string(cell % cols) + ")");
    }
    out[cell] = v;
  }
  return detail::emit("map_cells", std::move(out), {&input},
                      [jac, ch](const Tensor& g, std::span<Tensor* const> grads) {
                        for (std::size_t cell = 0; cell < g.size(); ++cell) {
                          for (std::size_t c = 0; c < ch; ++c) {
                            (*grads[0])[cell * ch + c] += g[cell] * (*jac)[cell * ch + c];
                          }
                        }
                      });
}

/// A scalar-valued program of its parameters, built from the ops above.
using ScalarProgram = std::function<Var(std::span<const Var> params)>;

/// Reverse-mode gradients of `program` at `params`.
inline std::vector<Tensor> gradient(const ScalarProgram& program,
                                    std::span<const Tensor> params) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const Tensor& p : params) leaves.push_back(tape.leaf(p));
  const Var out = program(leaves);
  if (!out.on_tape()) {
    std::vector<Tensor> zeros;
    for (const Tensor& p : params) zeros.emplace_back(p.shape(), 0.0);
    return zeros;
  }
  return tape.grad(out, leaves);
}

/// Largest relative disagreement between reverse-mode gradients and central
/// differences: |ad - fd| / max(|ad|, 1e-8) over every parameter element.
inline double finite_diff_check(const ScalarProgram& program,
                                std::span<const Tensor> params, double h) {
  if (!(h > 0)) throw ConfigError("finite_diff_check: step must be positive");
  const std::vector<Tensor> ad = gradient(program, params);

  std::vector<Var> point;
  point.reserve(params.size());
  for (const Tensor& p : params) point.emplace_back(p);
  auto evaluate = [&](std::size_t which, std::size_t idx, double delta) {
    Tensor shifted = params[which];
    shifted[idx] += delta;
    std::vector<Var> args = point;
    args[which] = Var(std::move(shifted));
    const double v = program(args).value().item();
    if (!std::isfinite(v)) throw NumericError("finite_diff_check: non-finite program output");
    return v;
  };

  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      const double fd = (evaluate(p, i, h) - evaluate(p, i, -h)) / (2.0 * h);
      const double a = ad[p][i];
      worst = std::max(worst, std::abs(a - fd) / std::max(std::abs(a), 1e-8));
    }
  }
  return worst;
}

}  // namespace decn

#endif  // DECN_AUTODIFF_HPP
