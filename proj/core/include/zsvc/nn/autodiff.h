// zsvc/nn/autodiff.h

// Copyright 2026  The zsvc authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ZSVC_NN_AUTODIFF_H_
#define ZSVC_NN_AUTODIFF_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "zsvc/nn/tensor.h"

namespace zsvc::nn {

// Reverse-mode autodiff over Tensor. Each op allocates a Node that holds the
// result value plus a closure pushing the incoming gradient to its parents.
// Graphs are built per step and released when the root Var goes out of scope;
// parameter leaves persist across steps and accumulate into Node::grad.

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  bool grad_ready = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  void accumulate(const Tensor& g);
  void accumulate_scaled(const Tensor& g, double scale);
  Tensor& ensure_grad();
};

using NodePtr = std::shared_ptr<Node>;

class Var {
 public:
  Var() = default;
  explicit Var(NodePtr node) : node_(std::move(node)) {}

  static Var constant(Tensor value);
  static Var leaf(Tensor value, bool requires_grad);

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool has_grad() const { return node_->grad_ready; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void zero_grad() {
    node_->grad = Tensor();
    node_->grad_ready = false;
  }
  const NodePtr& node() const { return node_; }

  Index size() const { return node_->value.size(); }
  const std::vector<Index>& shape() const { return node_->value.shape(); }
  double scalar_value() const { return node_->value.scalar_value(); }

 private:
  NodePtr node_;
};

// Thread-local switch; with gradients disabled ops keep no parents and no
// backward closures, so intermediates free themselves as they go out of
// scope. Used for inference and evaluation.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool saved_;
};

// Builder for new ops (layers.cpp defines convolution and friends on top of
// this). The closure is dropped when gradients are off or no parent needs
// them.
Var make_op(Tensor value, std::vector<Var> parents,
            std::function<void(Node&)> backward_fn);

// Runs backprop from a scalar root. Seeds d(root)/d(root) = 1 and walks the
// graph in reverse topological order.
void backward(const Var& root);

// --- elementwise ---
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var add_scalar(const Var& a, double s);
Var mul_scalar(const Var& a, double s);
Var neg(const Var& a);
Var sigmoid(const Var& a);
Var tanh_(const Var& a);
Var selu(const Var& a);
Var exp_(const Var& a);
Var log_(const Var& a);
Var sqrt_(const Var& a);
Var square(const Var& a);
Var abs_(const Var& a);

// --- reductions ---
Var sum(const Var& a);
Var mean(const Var& a);
Var sum_abs(const Var& a);       // L1 norm (sum of |x| over all entries)
Var norm2(const Var& a);         // L2 / Frobenius norm
Var dot(const Var& a, const Var& b);
Var logsumexp(const Var& a);     // over all entries, numerically stable

// --- linear algebra ---
Var matmul(const Var& a, const Var& b);  // {m,k}x{k,n}; rank-1 b is a column
Var add_channel(const Var& x, const Var& b);    // x {C,...} + b {C} broadcast
Var scale_channel(const Var& x, const Var& s);  // x {C,...} * s {C} broadcast

// --- shape ---
Var reshape(const Var& a, std::vector<Index> shape);
Var slice0(const Var& a, Index start, Index len);  // contiguous along axis 0
Var row(const Var& a, Index i);                    // slice0 + drop the axis
Var concat0(const std::vector<Var>& parts);
Var detach(const Var& a);

// --- vector helpers ---
Var l2_normalize(const Var& v);
Var cosine_similarity(const Var& a, const Var& b);

// Elementwise product with a fixed mask (dropout-style; the mask carries any
// 1/(1-p) scaling).
Var apply_mask(const Var& x, const Tensor& mask);

// --- operators ---
inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator/(const Var& a, const Var& b) { return div(a, b); }
inline Var operator+(const Var& a, double s) { return add_scalar(a, s); }
inline Var operator-(const Var& a, double s) { return add_scalar(a, -s); }
inline Var operator*(const Var& a, double s) { return mul_scalar(a, s); }
inline Var operator*(double s, const Var& a) { return mul_scalar(a, s); }
inline Var operator-(const Var& a) { return neg(a); }

namespace stats {
// Global counter of optimizer parameter updates; lets callers assert that an
// inference path performed no training step.
uint64_t optimizer_steps();
void count_optimizer_step();
}  // namespace stats

}  // namespace zsvc::nn

#endif  // ZSVC_NN_AUTODIFF_H_
