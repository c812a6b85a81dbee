// zsvc/nn/autodiff.cpp

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

#include "zsvc/nn/autodiff.h"

#include <atomic>
#include <cmath>
#include <unordered_set>

namespace zsvc::nn {

namespace {
thread_local bool g_grad_enabled = true;
std::atomic<uint64_t> g_optimizer_steps{0};

constexpr double kSeluLambda = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : saved_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = saved_; }

namespace stats {
uint64_t optimizer_steps() { return g_optimizer_steps.load(); }
void count_optimizer_step() { g_optimizer_steps.fetch_add(1); }
}  // namespace stats

Tensor& Node::ensure_grad() {
  if (!grad_ready) {
    grad = Tensor(value.shape());
    grad_ready = true;
  }
  return grad;
}

void Node::accumulate(const Tensor& g) {
  ensure_grad().array() += g.array();
}

void Node::accumulate_scaled(const Tensor& g, double scale) {
  ensure_grad().array() += scale * g.array();
}

Var Var::constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Var(std::move(n));
}

Var Var::leaf(Tensor value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return Var(std::move(n));
}

Var make_op(Tensor value, std::vector<Var> parents,
            std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (g_grad_enabled) {
    bool needs = false;
    for (const Var& p : parents) needs = needs || p.requires_grad();
    if (needs) {
      n->requires_grad = true;
      n->parents.reserve(parents.size());
      for (const Var& p : parents) n->parents.push_back(p.node());
      n->backward_fn = std::move(backward_fn);
    }
  }
  return Var(std::move(n));
}

void backward(const Var& root) {
  ZSVC_CHECK(root.defined() && root.size() == 1, ConfigError,
             "backward() needs a defined scalar root");
  if (!root.requires_grad()) return;

  // Iterative DFS post-order; reversed it is a valid topological order
  // (every node precedes its parents).
  std::vector<Node*> order;
  std::vector<std::pair<Node*, size_t>> stack;
  std::unordered_set<Node*> visited;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node()->ensure_grad().fill(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward_fn && node->grad_ready) node->backward_fn(*node);
  }
}

namespace {

void check_same_shape(const Var& a, const Var& b, const char* op) {
  ZSVC_CHECK(a.value().same_shape(b.value()), ConfigError,
             std::string(op) + ": shape mismatch");
}

// Unary elementwise helper: forward f(x), backward g * dfdx(x, y).
template <typename Fwd, typename Bwd>
Var unary_op(const Var& a, Fwd fwd, Bwd bwd) {
  Tensor out(a.value().shape());
  out.array() = fwd(a.value().array());
  return make_op(std::move(out), {a}, [a, bwd](Node& self) {
    Node* pa = self.parents[0].get();
    if (!pa->requires_grad) return;
    pa->ensure_grad().array() +=
        self.grad.array() * bwd(pa->value.array(), self.value.array());
  });
}

}  // namespace

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  Tensor out(a.value().shape());
  out.array() = a.value().array() + b.value().array();
  return make_op(std::move(out), {a, b}, [](Node& self) {
    if (self.parents[0]->requires_grad) self.parents[0]->accumulate(self.grad);
    if (self.parents[1]->requires_grad) self.parents[1]->accumulate(self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  Tensor out(a.value().shape());
  out.array() = a.value().array() - b.value().array();
  return make_op(std::move(out), {a, b}, [](Node& self) {
    if (self.parents[0]->requires_grad) self.parents[0]->accumulate(self.grad);
    if (self.parents[1]->requires_grad)
      self.parents[1]->accumulate_scaled(self.grad, -1.0);
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  Tensor out(a.value().shape());
  out.array() = a.value().array() * b.value().array();
  return make_op(std::move(out), {a, b}, [](Node& self) {
    Node* pa = self.parents[0].get();
    Node* pb = self.parents[1].get();
    if (pa->requires_grad)
      pa->ensure_grad().array() += self.grad.array() * pb->value.array();
    if (pb->requires_grad)
      pb->ensure_grad().array() += self.grad.array() * pa->value.array();
  });
}

Var div(const Var& a, const Var& b) {
  check_same_shape(a, b, "div");
  Tensor out(a.value().shape());
  out.array() = a.value().array() / b.value().array();
  return make_op(std::move(out), {a, b}, [](Node& self) {
    Node* pa = self.parents[0].get();
    Node* pb = self.parents[1].get();
    if (pa->requires_grad)
      pa->ensure_grad().array() += self.grad.array() / pb->value.array();
    if (pb->requires_grad)
      pb->ensure_grad().array() -= self.grad.array() * self.value.array() /
                                   pb->value.array();
  });
}

Var add_scalar(const Var& a, double s) {
  Tensor out(a.value().shape());
  out.array() = a.value().array() + s;
  return make_op(std::move(out), {a}, [](Node& self) {
    if (self.parents[0]->requires_grad) self.parents[0]->accumulate(self.grad);
  });
}

Var mul_scalar(const Var& a, double s) {
  Tensor out(a.value().shape());
  out.array() = a.value().array() * s;
  return make_op(std::move(out), {a}, [s](Node& self) {
    if (self.parents[0]->requires_grad)
      self.parents[0]->accumulate_scaled(self.grad, s);
  });
}

Var neg(const Var& a) { return mul_scalar(a, -1.0); }

Var sigmoid(const Var& a) {
  return unary_op(
      a, [](const auto& x) { return 1.0 / (1.0 + (-x).exp()); },
      [](const auto&, const auto& y) { return y * (1.0 - y); });
}

Var tanh_(const Var& a) {
  return unary_op(
      a, [](const auto& x) { return x.tanh(); },
      [](const auto&, const auto& y) { return 1.0 - y.square(); });
}

Var selu(const Var& a) {
  return unary_op(
      a,
      [](const auto& x) {
        return (x > 0.0).select(kSeluLambda * x,
                                kSeluLambda * kSeluAlpha * (x.exp() - 1.0));
      },
      [](const auto& x, const auto& y) {
        return (x > 0.0).select(Eigen::ArrayXd::Constant(x.size(), kSeluLambda),
                                y + kSeluLambda * kSeluAlpha);
      });
}

Var exp_(const Var& a) {
  return unary_op(
      a, [](const auto& x) { return x.exp(); },
      [](const auto&, const auto& y) { return y; });
}

Var log_(const Var& a) {
  return unary_op(
      a, [](const auto& x) { return x.log(); },
      [](const auto& x, const auto&) { return 1.0 / x; });
}

Var sqrt_(const Var& a) {
  return unary_op(
      a, [](const auto& x) { return x.sqrt(); },
      [](const auto&, const auto& y) { return 0.5 / y; });
}

Var square(const Var& a) {
  return unary_op(
      a, [](const auto& x) { return x.square(); },
      [](const auto& x, const auto&) { return 2.0 * x; });
}

Var abs_(const Var& a) {
  return unary_op(
      a, [](const auto& x) { return x.abs(); },
      [](const auto& x, const auto&) { return x.sign(); });
}

Var sum(const Var& a) {
  Tensor out = Tensor::scalar(a.value().array().sum());
  return make_op(std::move(out), {a}, [](Node& self) {
    if (self.parents[0]->requires_grad)
      self.parents[0]->ensure_grad().array() += self.grad[0];
  });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.size());
  Tensor out = Tensor::scalar(a.value().array().sum() / n);
  return make_op(std::move(out), {a}, [n](Node& self) {
    if (self.parents[0]->requires_grad)
      self.parents[0]->ensure_grad().array() += self.grad[0] / n;
  });
}

Var sum_abs(const Var& a) {
  Tensor out = Tensor::scalar(a.value().array().abs().sum());
  return make_op(std::move(out), {a}, [](Node& self) {
    Node* pa = self.parents[0].get();
    if (!pa->requires_grad) return;
    pa->ensure_grad().array() += self.grad[0] * pa->value.array().sign();
  });
}

Var norm2(const Var& a) {
  const double n = std::sqrt(a.value().array().square().sum());
  Tensor out = Tensor::scalar(n);
  return make_op(std::move(out), {a}, [n](Node& self) {
    Node* pa = self.parents[0].get();
    if (!pa->requires_grad) return;
    if (n > 0.0)
      pa->ensure_grad().array() += (self.grad[0] / n) * pa->value.array();
    // Subgradient 0 at the origin.
  });
}

Var dot(const Var& a, const Var& b) {
  check_same_shape(a, b, "dot");
  Tensor out = Tensor::scalar((a.value().array() * b.value().array()).sum());
  return make_op(std::move(out), {a, b}, [](Node& self) {
    Node* pa = self.parents[0].get();
    Node* pb = self.parents[1].get();
    if (pa->requires_grad)
      pa->ensure_grad().array() += self.grad[0] * pb->value.array();
    if (pb->requires_grad)
      pb->ensure_grad().array() += self.grad[0] * pa->value.array();
  });
}

Var logsumexp(const Var& a) {
  const auto& x = a.value().array();
  const double m = x.maxCoeff();
  const double lse = m + std::log((x - m).exp().sum());
  Tensor out = Tensor::scalar(lse);
  return make_op(std::move(out), {a}, [lse](Node& self) {
    Node* pa = self.parents[0].get();
    if (!pa->requires_grad) return;
    pa->ensure_grad().array() +=
        self.grad[0] * (pa->value.array() - lse).exp();
  });
}

Var matmul(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  ZSVC_CHECK(av.rank() == 2, ConfigError, "matmul: lhs must be rank 2");
  ZSVC_CHECK(bv.rank() == 1 || bv.rank() == 2, ConfigError,
             "matmul: rhs must be rank 1 or 2");
  const Index m = av.dim(0), k = av.dim(1);
  const Index n = bv.rank() == 2 ? bv.dim(1) : 1;
  ZSVC_CHECK(bv.dim(0) == k, ConfigError, "matmul: inner dimension mismatch");

  Tensor out(bv.rank() == 2 ? std::vector<Index>{m, n} : std::vector<Index>{m});
  out.mat(m, n).noalias() = av.mat(m, k) * bv.mat(k, n);
  return make_op(std::move(out), {a, b}, [m, k, n](Node& self) {
    Node* pa = self.parents[0].get();
    Node* pb = self.parents[1].get();
    ConstMatMap g(self.grad.data(), m, n);
    if (pa->requires_grad) {
      pa->ensure_grad();
      MatMap(pa->grad.data(), m, k).noalias() +=
          g * ConstMatMap(pb->value.data(), k, n).transpose();
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      MatMap(pb->grad.data(), k, n).noalias() +=
          ConstMatMap(pa->value.data(), m, k).transpose() * g;
    }
  });
}

namespace {

// Shared broadcast machinery for add_channel / scale_channel: x {C, ...},
// vec {C}; inner = product of trailing dims.
Index channel_inner_size(const Var& x, const Var& vec, const char* op) {
  ZSVC_CHECK(x.shape().size() >= 1 && vec.shape().size() == 1, ConfigError,
             std::string(op) + ": bad ranks");
  ZSVC_CHECK(x.shape()[0] == vec.shape()[0], ConfigError,
             std::string(op) + ": channel count mismatch");
  return x.size() / x.shape()[0];
}

}  // namespace

Var add_channel(const Var& x, const Var& b) {
  const Index inner = channel_inner_size(x, b, "add_channel");
  const Index c = x.shape()[0];
  Tensor out(x.value().shape());
  ConstMatMap xm(x.value().data(), c, inner);
  MatMap om(out.data(), c, inner);
  om = xm.colwise() + Eigen::Map<const Eigen::VectorXd>(b.value().data(), c);
  return make_op(std::move(out), {x, b}, [c, inner](Node& self) {
    Node* px = self.parents[0].get();
    Node* pb = self.parents[1].get();
    if (px->requires_grad) px->accumulate(self.grad);
    if (pb->requires_grad) {
      pb->ensure_grad();
      Eigen::Map<Eigen::VectorXd>(pb->grad.data(), c) +=
          ConstMatMap(self.grad.data(), c, inner).rowwise().sum();
    }
  });
}

Var scale_channel(const Var& x, const Var& s) {
  const Index inner = channel_inner_size(x, s, "scale_channel");
  const Index c = x.shape()[0];
  Tensor out(x.value().shape());
  ConstMatMap xm(x.value().data(), c, inner);
  MatMap om(out.data(), c, inner);
  om = xm.array().colwise() *
       Eigen::Map<const Eigen::ArrayXd>(s.value().data(), c);
  return make_op(std::move(out), {x, s}, [c, inner](Node& self) {
    Node* px = self.parents[0].get();
    Node* ps = self.parents[1].get();
    ConstMatMap g(self.grad.data(), c, inner);
    if (px->requires_grad) {
      px->ensure_grad();
      MatMap(px->grad.data(), c, inner).array() +=
          g.array().colwise() *
          Eigen::Map<const Eigen::ArrayXd>(ps->value.data(), c);
    }
    if (ps->requires_grad) {
      ps->ensure_grad();
      Eigen::Map<Eigen::VectorXd>(ps->grad.data(), c) +=
          (g.array() * ConstMatMap(px->value.data(), c, inner).array())
              .rowwise()
              .sum()
              .matrix();
    }
  });
}

Var reshape(const Var& a, std::vector<Index> shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return make_op(std::move(out), {a}, [](Node& self) {
    Node* pa = self.parents[0].get();
    if (!pa->requires_grad) return;
    pa->ensure_grad().array() += self.grad.array();
  });
}

Var slice0(const Var& a, Index start, Index len) {
  const Tensor& av = a.value();
  ZSVC_CHECK(av.rank() >= 1, ConfigError, "slice0: rank must be >= 1");
  const Index c = av.shape()[0];
  ZSVC_CHECK(start >= 0 && len >= 0 && start + len <= c, ConfigError,
             "slice0: out of range");
  const Index inner = av.size() / std::max<Index>(c, 1);
  std::vector<Index> out_shape = av.shape();
  out_shape[0] = len;
  Tensor out(out_shape);
  out.array() = av.array().segment(start * inner, len * inner);
  return make_op(std::move(out), {a}, [start, inner, len](Node& self) {
    Node* pa = self.parents[0].get();
    if (!pa->requires_grad) return;
    pa->ensure_grad().array().segment(start * inner, len * inner) +=
        self.grad.array();
  });
}

Var row(const Var& a, Index i) {
  ZSVC_CHECK(a.value().rank() == 2, ConfigError, "row: rank must be 2");
  return reshape(slice0(a, i, 1), {a.value().dim(1)});
}

Var concat0(const std::vector<Var>& parts) {
  ZSVC_CHECK(!parts.empty(), ConfigError, "concat0: no parts");
  std::vector<Index> shape = parts[0].value().shape();
  Index total = 0;
  for (const Var& p : parts) {
    ZSVC_CHECK(p.value().rank() == static_cast<Index>(shape.size()), ConfigError,
               "concat0: rank mismatch");
    total += p.value().shape()[0];
  }
  shape[0] = total;
  Tensor out(shape);
  Index offset = 0;
  std::vector<Index> sizes;
  sizes.reserve(parts.size());
  for (const Var& p : parts) {
    out.array().segment(offset, p.size()) = p.value().array();
    sizes.push_back(p.size());
    offset += p.size();
  }
  return make_op(std::move(out), parts, [sizes](Node& self) {
    Index off = 0;
    for (size_t i = 0; i < self.parents.size(); ++i) {
      Node* p = self.parents[i].get();
      if (p->requires_grad)
        p->ensure_grad().array() += self.grad.array().segment(off, sizes[i]);
      off += sizes[i];
    }
  });
}

Var detach(const Var& a) { return Var::constant(a.value()); }

Var l2_normalize(const Var& v) {
  const double r = std::sqrt(v.value().array().square().sum());
  const double r_eff = std::max(r, 1e-12);
  Tensor out(v.value().shape());
  out.array() = v.value().array() / r_eff;
  return make_op(std::move(out), {v}, [r_eff](Node& self) {
    Node* pv = self.parents[0].get();
    if (!pv->requires_grad) return;
    const double gy = (self.grad.array() * self.value.array()).sum();
    pv->ensure_grad().array() +=
        (self.grad.array() - self.value.array() * gy) / r_eff;
  });
}

Var cosine_similarity(const Var& a, const Var& b) {
  return div(dot(a, b), mul(norm2(a), norm2(b)));
}

Var apply_mask(const Var& x, const Tensor& mask) {
  ZSVC_CHECK(x.value().same_shape(mask), ConfigError, "apply_mask: shape mismatch");
  Tensor out(x.value().shape());
  out.array() = x.value().array() * mask.array();
  return make_op(std::move(out), {x}, [mask](Node& self) {
    Node* px = self.parents[0].get();
    if (!px->requires_grad) return;
    px->ensure_grad().array() += self.grad.array() * mask.array();
  });
}

}  // namespace zsvc::nn
