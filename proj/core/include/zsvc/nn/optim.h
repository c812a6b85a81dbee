// zsvc/nn/optim.h

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

#ifndef ZSVC_NN_OPTIM_H_
#define ZSVC_NN_OPTIM_H_

#include <vector>

#include "zsvc/nn/layers.h"

namespace zsvc::nn {

// Global L2 norm over all accumulated gradients in the set.
double grad_norm(const ParamSet& params);

// If grad_norm exceeds max_norm the gradients are scaled down in place.
// Returns the pre-clip norm.
double clip_grad_norm(ParamSet& params, double max_norm);

// Adaptive-moment gradient descent with bias correction.
class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Applies one update using current gradients. Parameters without an
  // accumulated gradient are skipped.
  void step(ParamSet& params, double lr);

  int64_t step_count() const { return t_; }
  double beta1() const { return beta1_; }
  double beta2() const { return beta2_; }

  // State accessors for checkpointing / cloning.
  struct State {
    int64_t t = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
  };
  State snapshot() const;
  void restore(const State& state, const ParamSet& params);

 private:
  void init_state(const ParamSet& params);

  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace zsvc::nn

#endif  // ZSVC_NN_OPTIM_H_
