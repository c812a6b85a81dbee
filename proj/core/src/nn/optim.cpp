// zsvc/nn/optim.cpp

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

#include "zsvc/nn/optim.h"

#include <cmath>

namespace zsvc::nn {

double grad_norm(const ParamSet& params) {
  double sq = 0.0;
  for (const auto& [name, v] : params.items())
    if (v.has_grad()) sq += v.grad().array().square().sum();
  return std::sqrt(sq);
}

double clip_grad_norm(ParamSet& params, double max_norm) {
  ZSVC_CHECK(max_norm > 0.0, ConfigError, "clip norm must be positive");
  const double norm = grad_norm(params);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& [name, v] : params.items())
      if (v.has_grad()) const_cast<Tensor&>(v.grad()).array() *= scale;
  }
  return norm;
}

void Adam::init_state(const ParamSet& params) {
  m_.clear();
  v_.clear();
  for (const auto& [name, p] : params.items()) {
    m_.emplace_back(p.value().shape());
    v_.emplace_back(p.value().shape());
  }
}

void Adam::step(ParamSet& params, double lr) {
  if (m_.empty()) init_state(params);
  ZSVC_CHECK(m_.size() == params.items().size(), ConfigError,
             "optimizer state does not match parameter set");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  size_t i = 0;
  for (auto& [name, p] : params.items()) {
    if (p.has_grad()) {
      const auto& g = p.grad().array();
      m_[i].array() = beta1_ * m_[i].array() + (1.0 - beta1_) * g;
      v_[i].array() = beta2_ * v_[i].array() + (1.0 - beta2_) * g.square();
      p.node()->value.array() -=
          lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps_);
    }
    ++i;
  }
  stats::count_optimizer_step();
}

Adam::State Adam::snapshot() const {
  State s;
  s.t = t_;
  s.m = m_;
  s.v = v_;
  return s;
}

void Adam::restore(const State& state, const ParamSet& params) {
  if (!state.m.empty()) {
    ZSVC_CHECK(state.m.size() == params.items().size() &&
                   state.v.size() == params.items().size(),
               ConfigError, "optimizer state does not match parameter set");
  }
  t_ = state.t;
  m_ = state.m;
  v_ = state.v;
}

}  // namespace zsvc::nn
