/* Copyright 2026 The SceneQA Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Minimal reverse-mode automatic differentiation over dense 2-D matrices.
//
// Every value is a matrix (scalars are 1x1). A Tensor is a shared handle to a
// graph node; operations record a backward closure only when at least one
// input requires a gradient and gradient recording is enabled on the calling
// thread (see NoGradGuard). Parameters are leaf tensors whose gradients
// accumulate across backward() calls until zero_grad().

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace sceneqa {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace ad {

namespace detail {
inline bool& grad_mode_flag() {
  thread_local bool enabled = true;
  return enabled;
}
}  // namespace detail

inline bool grad_enabled() { return detail::grad_mode_flag(); }

// Disables graph recording on the current thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_mode_flag()) { detail::grad_mode_flag() = false; }
  ~NoGradGuard() { detail::grad_mode_flag() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <typename T>
struct Node {
  Matrix<T> value;
  Matrix<T> grad;  // empty until a gradient arrives
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward_fn;
  bool requires_grad = false;

  void accumulate(const Matrix<T>& g) {
    if (grad.size() == 0) {
      grad = g;
    } else {
      grad += g;
    }
  }
  template <typename Expr>
  void accumulate_expr(const Expr& g) {
    if (grad.size() == 0) {
      grad = g;
    } else {
      grad += g;
    }
  }
};

template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Tensor constant(Matrix<T> value) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    return Tensor(std::move(n));
  }

  static Tensor parameter(Matrix<T> value) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->requires_grad = true;
    return Tensor(std::move(n));
  }

  static Tensor scalar(T v) {
    Matrix<T> m(1, 1);
    m(0, 0) = v;
    return constant(std::move(m));
  }

  bool defined() const { return node_ != nullptr; }
  const Matrix<T>& value() const { return node_->value; }
  Matrix<T>& mutable_value() { return node_->value; }
  const Matrix<T>& grad() const { return node_->grad; }
  Matrix<T>& mutable_grad() { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  T item() const {
    if (node_->value.size() != 1) throw ShapeError("item() on a non-scalar tensor");
    return node_->value(0, 0);
  }
  void zero_grad() { node_->grad.resize(0, 0); }

  // Returns a constant tensor sharing no graph history with this one.
  Tensor detach() const { return constant(node_->value); }

  // Backpropagates from this tensor. A non-scalar root is seeded with ones.
  void backward() const;

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

namespace detail {

template <typename T>
bool any_requires_grad(std::initializer_list<const Tensor<T>*> inputs) {
  if (!grad_enabled()) return false;
  for (const auto* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

template <typename T>
Tensor<T> make_result(Matrix<T> value, std::vector<std::shared_ptr<Node<T>>> inputs,
                      std::function<void(Node<T>&)> fn, bool record) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  if (record) {
    n->requires_grad = true;
    n->inputs = std::move(inputs);
    n->backward_fn = std::move(fn);
  }
  return Tensor<T>(std::move(n));
}

inline void check(bool cond, const char* what) {
  if (!cond) throw ShapeError(what);
}

}  // namespace detail

template <typename T>
void Tensor<T>::backward() const {
  // Iterative post-order DFS; the reverse of the resulting order is a valid
  // topological order for gradient propagation.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  if (!node_->requires_grad) return;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->inputs.size()) {
      Node<T>* child = n->inputs[next++].get();
      if (child->requires_grad && !seen.count(child)) {
        seen.insert(child);
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  node_->accumulate(Matrix<T>::Ones(node_->value.rows(), node_->value.cols()));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward_fn && n->grad.size() != 0) n->backward_fn(*n);
  }
  // Release intermediate gradients so repeated backward passes over new
  // graphs only accumulate into leaves.
  for (Node<T>* n : order) {
    if (n->backward_fn) n->grad.resize(0, 0);
  }
}

// ---------------------------------------------------------------------------
// Operations

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::check(a.cols() == b.rows(), "matmul: inner dimensions differ");
  const bool record = detail::any_requires_grad<T>({&a, &b});
  Matrix<T> out = a.value() * b.value();
  auto an = a.node_ptr();
  auto bn = b.node_ptr();
  return detail::make_result<T>(
      std::move(out), {an, bn},
      [an, bn](Node<T>& self) {
        if (an->requires_grad) an->accumulate_expr(self.grad * bn->value.transpose());
        if (bn->requires_grad) bn->accumulate_expr(an->value.transpose() * self.grad);
      },
      record);
}

// a * b^T
template <typename T>
Tensor<T> matmul_bt(const Tensor<T>& a, const Tensor<T>& b) {
  detail::check(a.cols() == b.cols(), "matmul_bt: inner dimensions differ");
  const bool record = detail::any_requires_grad<T>({&a, &b});
  Matrix<T> out = a.value() * b.value().transpose();
  auto an = a.node_ptr();
  auto bn = b.node_ptr();
  return detail::make_result<T>(
      std::move(out), {an, bn},
      [an, bn](Node<T>& self) {
        if (an->requires_grad) an->accumulate_expr(self.grad * bn->value);
        if (bn->requires_grad) bn->accumulate_expr(self.grad.transpose() * an->value);
      },
      record);
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  detail::check(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
  const bool record = detail::any_requires_grad<T>({&a, &b});
  Matrix<T> out = a.value() + b.value();
  auto an = a.node_ptr();
  auto bn = b.node_ptr();
  return detail::make_result<T>(
      std::move(out), {an, bn},
      [an, bn](Node<T>& self) {
        if (an->requires_grad) an->accumulate(self.grad);
        if (bn->requires_grad) bn->accumulate(self.grad);
      },
      record);
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  detail::check(a.rows() == b.rows() && a.cols() == b.cols(), "sub: shape mismatch");
  const bool record = detail::any_requires_grad<T>({&a, &b});
  Matrix<T> out = a.value() - b.value();
  auto an = a.node_ptr();
  auto bn = b.node_ptr();
  return detail::make_result<T>(
      std::move(out), {an, bn},
      [an, bn](Node<T>& self) {
        if (an->requires_grad) an->accumulate(self.grad);
        if (bn->requires_grad) bn->accumulate_expr(-self.grad);
      },
      record);
}

// x (n x m) + bias (1 x m) broadcast over rows.
template <typename T>
Tensor<T> add_row(const Tensor<T>& x, const Tensor<T>& bias) {
  detail::check(bias.rows() == 1 && bias.cols() == x.cols(), "add_row: bias shape mismatch");
  const bool record = detail::any_requires_grad<T>({&x, &bias});
  Matrix<T> out = x.value();
  out.rowwise() += bias.value().row(0);
  auto xn = x.node_ptr();
  auto bn = bias.node_ptr();
  return detail::make_result<T>(
      std::move(out), {xn, bn},
      [xn, bn](Node<T>& self) {
        if (xn->requires_grad) xn->accumulate(self.grad);
        if (bn->requires_grad) bn->accumulate_expr(self.grad.colwise().sum());
      },
      record);
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T s) {
  const bool record = detail::any_requires_grad<T>({&x});
  Matrix<T> out = x.value() * s;
  auto xn = x.node_ptr();
  return detail::make_result<T>(
      std::move(out), {xn}, [xn, s](Node<T>& self) { xn->accumulate_expr(self.grad * s); },
      record);
}

// Scalar (1x1) times tensor, differentiable in both.
template <typename T>
Tensor<T> scale_by(const Tensor<T>& x, const Tensor<T>& s) {
  detail::check(s.rows() == 1 && s.cols() == 1, "scale_by: scale must be 1x1");
  const bool record = detail::any_requires_grad<T>({&x, &s});
  Matrix<T> out = x.value() * s.value()(0, 0);
  auto xn = x.node_ptr();
  auto sn = s.node_ptr();
  return detail::make_result<T>(
      std::move(out), {xn, sn},
      [xn, sn](Node<T>& self) {
        if (xn->requires_grad) xn->accumulate_expr(self.grad * sn->value(0, 0));
        if (sn->requires_grad) {
          Matrix<T> g(1, 1);
          g(0, 0) = self.grad.cwiseProduct(xn->value).sum();
          sn->accumulate(g);
        }
      },
      record);
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  const bool record = detail::any_requires_grad<T>({&x});
  Matrix<T> out = x.value().cwiseMax(T(0));
  auto xn = x.node_ptr();
  return detail::make_result<T>(
      std::move(out), {xn},
      [xn](Node<T>& self) {
        xn->accumulate_expr(
            (xn->value.array() > T(0)).select(self.grad, Matrix<T>::Zero(self.grad.rows(), self.grad.cols())));
      },
      record);
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& x) {
  const bool record = detail::any_requires_grad<T>({&x});
  Matrix<T> out = x.value().transpose();
  auto xn = x.node_ptr();
  return detail::make_result<T>(
      std::move(out), {xn}, [xn](Node<T>& self) { xn->accumulate_expr(self.grad.transpose()); },
      record);
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  const bool record = detail::any_requires_grad<T>({&x});
  Matrix<T> out(1, 1);
  out(0, 0) = x.value().sum();
  auto xn = x.node_ptr();
  return detail::make_result<T>(
      std::move(out), {xn},
      [xn](Node<T>& self) {
        xn->accumulate_expr(Matrix<T>::Constant(xn->value.rows(), xn->value.cols(), self.grad(0, 0)));
      },
      record);
}

// Row-wise layer normalization with learned gain and bias (1 x m each).
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias,
                     T eps = T(1e-5)) {
  detail::check(gain.cols() == x.cols() && bias.cols() == x.cols(), "layer_norm: shape mismatch");
  const bool record = detail::any_requires_grad<T>({&x, &gain, &bias});
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  Matrix<T> xhat(n, m);
  Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const T mean = x.value().row(r).mean();
    const T var = (x.value().row(r).array() - mean).square().mean();
    inv_std(r) = T(1) / std::sqrt(var + eps);
    xhat.row(r) = (x.value().row(r).array() - mean) * inv_std(r);
  }
  Matrix<T> out = xhat.array().rowwise() * gain.value().row(0).array();
  out.rowwise() += bias.value().row(0);
  auto xn = x.node_ptr();
  auto gn = gain.node_ptr();
  auto bn = bias.node_ptr();
  return detail::make_result<T>(
      std::move(out), {xn, gn, bn},
      [xn, gn, bn, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node<T>& self) {
        const Matrix<T>& g = self.grad;
        if (gn->requires_grad) gn->accumulate_expr(g.cwiseProduct(xhat).colwise().sum());
        if (bn->requires_grad) bn->accumulate_expr(g.colwise().sum());
        if (xn->requires_grad) {
          const T m = static_cast<T>(g.cols());
          Matrix<T> dxhat = g.array().rowwise() * gn->value.row(0).array();
          Matrix<T> dx(g.rows(), g.cols());
          for (Eigen::Index r = 0; r < g.rows(); ++r) {
            const T mean_d = dxhat.row(r).mean();
            const T mean_dx = dxhat.row(r).cwiseProduct(xhat.row(r)).sum() / m;
            dx.row(r) = (dxhat.row(r).array() - mean_d - xhat.row(r).array() * mean_dx) * inv_std(r);
          }
          xn->accumulate(dx);
        }
      },
      record);
}

// Row-wise softmax of x + additive_mask. Mask entries are 0 or -inf; rows that
// are entirely masked produce all-zero output.
template <typename T>
Tensor<T> masked_softmax(const Tensor<T>& x, const Matrix<T>* additive_mask = nullptr) {
  const bool record = detail::any_requires_grad<T>({&x});
  Matrix<T> z = x.value();
  if (additive_mask != nullptr) {
    detail::check(additive_mask->rows() == z.rows() && additive_mask->cols() == z.cols(),
                  "masked_softmax: mask shape mismatch");
    z += *additive_mask;
  }
  Matrix<T> out(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const T mx = z.row(r).maxCoeff();
    if (!std::isfinite(mx)) {
      out.row(r).setZero();
      continue;
    }
    out.row(r) = (z.row(r).array() - mx).exp();
    if (additive_mask != nullptr) {
      // exp() may clamp -inf to a denormal instead of zero
      for (Eigen::Index c = 0; c < z.cols(); ++c) {
        if (z(r, c) == -std::numeric_limits<T>::infinity()) out(r, c) = T(0);
      }
    }
    out.row(r) /= out.row(r).sum();
  }
  auto xn = x.node_ptr();
  return detail::make_result<T>(
      std::move(out), {xn},
      [xn](Node<T>& self) {
        const Matrix<T>& y = self.value;
        Eigen::Matrix<T, Eigen::Dynamic, 1> dots = self.grad.cwiseProduct(y).rowwise().sum();
        Matrix<T> dx = y.cwiseProduct(self.grad - dots.replicate(1, y.cols()));
        xn->accumulate(dx);
      },
      record);
}

// Inverted dropout with a fixed Bernoulli mask drawn from rng.
template <typename T, typename Rng>
Tensor<T> dropout(const Tensor<T>& x, T p, Rng& rng) {
  if (p <= T(0)) return x;
  const bool record = detail::any_requires_grad<T>({&x});
  std::bernoulli_distribution keep(1.0 - static_cast<double>(p));
  Matrix<T> mask(x.rows(), x.cols());
  const T inv = T(1) / (T(1) - p);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? inv : T(0);
  Matrix<T> out = x.value().cwiseProduct(mask);
  auto xn = x.node_ptr();
  return detail::make_result<T>(
      std::move(out), {xn},
      [xn, mask = std::move(mask)](Node<T>& self) { xn->accumulate_expr(self.grad.cwiseProduct(mask)); },
      record);
}

// Selects rows of table by index; backward scatter-adds.
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, std::span<const int> ids) {
  const bool record = detail::any_requires_grad<T>({&table});
  Matrix<T> out(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    detail::check(ids[i] >= 0 && ids[i] < table.rows(), "gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(ids[i]);
  }
  auto tn = table.node_ptr();
  std::vector<int> idx(ids.begin(), ids.end());
  return detail::make_result<T>(
      std::move(out), {tn},
      [tn, idx = std::move(idx)](Node<T>& self) {
        if (tn->grad.size() == 0) tn->grad = Matrix<T>::Zero(tn->value.rows(), tn->value.cols());
        for (std::size_t i = 0; i < idx.size(); ++i) {
          tn->grad.row(idx[i]) += self.grad.row(static_cast<Eigen::Index>(i));
        }
      },
      record);
}

template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts) {
  detail::check(!parts.empty(), "concat_rows: no inputs");
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  bool record = false;
  std::vector<std::shared_ptr<Node<T>>> nodes;
  for (const auto& p : parts) {
    detail::check(p.cols() == cols, "concat_rows: column mismatch");
    rows += p.rows();
    record = record || (grad_enabled() && p.requires_grad());
    nodes.push_back(p.node_ptr());
  }
  Matrix<T> out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    if (p.rows() > 0) out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return detail::make_result<T>(
      std::move(out), nodes,
      [](Node<T>& self) {
        Eigen::Index off = 0;
        for (auto& in : self.inputs) {
          const Eigen::Index n = in->value.rows();
          if (in->requires_grad && n > 0) in->accumulate(self.grad.middleRows(off, n));
          off += n;
        }
      },
      record);
}

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
  detail::check(!parts.empty(), "concat_cols: no inputs");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  bool record = false;
  std::vector<std::shared_ptr<Node<T>>> nodes;
  for (const auto& p : parts) {
    detail::check(p.rows() == rows, "concat_cols: row mismatch");
    cols += p.cols();
    record = record || (grad_enabled() && p.requires_grad());
    nodes.push_back(p.node_ptr());
  }
  Matrix<T> out(rows, cols);
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return detail::make_result<T>(
      std::move(out), nodes,
      [](Node<T>& self) {
        Eigen::Index off = 0;
        for (auto& in : self.inputs) {
          const Eigen::Index n = in->value.cols();
          if (in->requires_grad) in->accumulate(self.grad.middleCols(off, n));
          off += n;
        }
      },
      record);
}

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& x, Eigen::Index start, Eigen::Index count) {
  detail::check(start >= 0 && count >= 0 && start + count <= x.rows(), "slice_rows: out of range");
  const bool record = detail::any_requires_grad<T>({&x});
  Matrix<T> out = x.value().middleRows(start, count);
  auto xn = x.node_ptr();
  return detail::make_result<T>(
      std::move(out), {xn},
      [xn, start, count](Node<T>& self) {
        if (xn->grad.size() == 0) xn->grad = Matrix<T>::Zero(xn->value.rows(), xn->value.cols());
        xn->grad.middleRows(start, count) += self.grad;
      },
      record);
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& x, Eigen::Index start, Eigen::Index count) {
  detail::check(start >= 0 && count >= 0 && start + count <= x.cols(), "slice_cols: out of range");
  const bool record = detail::any_requires_grad<T>({&x});
  Matrix<T> out = x.value().middleCols(start, count);
  auto xn = x.node_ptr();
  return detail::make_result<T>(
      std::move(out), {xn},
      [xn, start, count](Node<T>& self) {
        if (xn->grad.size() == 0) xn->grad = Matrix<T>::Zero(xn->value.rows(), xn->value.cols());
        xn->grad.middleCols(start, count) += self.grad;
      },
      record);
}

// Numerically stable row-wise log-softmax.
template <typename T>
Matrix<T> log_softmax_rows(const Matrix<T>& z) {
  Matrix<T> out(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const T mx = z.row(r).maxCoeff();
    const T lse = mx + std::log((z.row(r).array() - mx).exp().sum());
    out.row(r) = z.row(r).array() - lse;
  }
  return out;
}

// Sum over rows r of log_softmax(logits)[r, targets[r]]; rows whose target is
// negative are skipped. Returns a 1x1 tensor.
template <typename T>
Tensor<T> sum_log_softmax_at(const Tensor<T>& logits, std::span<const int> targets) {
  detail::check(static_cast<Eigen::Index>(targets.size()) == logits.rows(),
                "sum_log_softmax_at: target count differs from logit rows");
  const bool record = detail::any_requires_grad<T>({&logits});
  Matrix<T> logp = log_softmax_rows<T>(logits.value());
  Matrix<T> out(1, 1);
  out(0, 0) = T(0);
  for (std::size_t r = 0; r < targets.size(); ++r) {
    if (targets[r] < 0) continue;
    detail::check(targets[r] < logits.cols(), "sum_log_softmax_at: target out of range");
    out(0, 0) += logp(static_cast<Eigen::Index>(r), targets[r]);
  }
  auto ln = logits.node_ptr();
  std::vector<int> tgt(targets.begin(), targets.end());
  return detail::make_result<T>(
      std::move(out), {ln},
      [ln, tgt = std::move(tgt), logp = std::move(logp)](Node<T>& self) {
        const T g = self.grad(0, 0);
        Matrix<T> d = Matrix<T>::Zero(logp.rows(), logp.cols());
        for (std::size_t r = 0; r < tgt.size(); ++r) {
          if (tgt[r] < 0) continue;
          const auto row = static_cast<Eigen::Index>(r);
          d.row(row) = -logp.row(row).array().exp() * g;
          d(row, tgt[r]) += g;
        }
        ln->accumulate(d);
      },
      record);
}

// Mean binary cross-entropy with logits over all entries. labels in {0,1}.
template <typename T>
Tensor<T> bce_with_logits_mean(const Tensor<T>& logits, const Matrix<T>& labels) {
  detail::check(labels.rows() == logits.rows() && labels.cols() == logits.cols(),
                "bce_with_logits_mean: label shape mismatch");
  const bool record = detail::any_requires_grad<T>({&logits});
  const auto& z = logits.value();
  const T n = static_cast<T>(z.size());
  T total = T(0);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const T x = z.data()[i];
    const T y = labels.data()[i];
    // log(1 + exp(-|x|)) + max(x, 0) - x*y
    total += std::max(x, T(0)) - x * y + std::log1p(std::exp(-std::abs(x)));
  }
  Matrix<T> out(1, 1);
  out(0, 0) = total / n;
  auto ln = logits.node_ptr();
  return detail::make_result<T>(
      std::move(out), {ln},
      [ln, labels, n](Node<T>& self) {
        const T g = self.grad(0, 0) / n;
        Matrix<T> sig = (T(1) / (T(1) + (-ln->value.array()).exp())).matrix();
        ln->accumulate_expr((sig - labels) * g);
      },
      record);
}

}  // namespace ad

template <typename T>
using Tensor = ad::Tensor<T>;

}  // namespace sceneqa
