// zsvc/nn/layers.h

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

#ifndef ZSVC_NN_LAYERS_H_
#define ZSVC_NN_LAYERS_H_

#include <string>
#include <utility>
#include <vector>

#include "zsvc/nn/autodiff.h"

namespace zsvc::nn {

// Ordered, named collection of trainable leaves. The order is the canonical
// one for optimizers and checkpoints.
class ParamSet {
 public:
  Var create(const std::string& name, Tensor init);
  const std::vector<std::pair<std::string, Var>>& items() const { return items_; }
  const Var& find(const std::string& name) const;
  bool contains(const std::string& name) const;
  void zero_grad();
  Index total_size() const;
  bool all_finite() const;
  // Copies values elementwise from a structurally identical set.
  void copy_values_from(const ParamSet& other);

 private:
  std::vector<std::pair<std::string, Var>> items_;
};

// --- convolution ---
// x {Cin, T}, weight {Cout, Cin*k}, bias {Cout} -> {Cout, To}
Var conv1d(const Var& x, const Var& weight, const Var& bias, Index k,
           Index stride, Index pad);
// x {Cin, H, W}, weight {Cout, Cin*kh*kw}, bias {Cout} -> {Cout, Ho, Wo}
Var conv2d(const Var& x, const Var& weight, const Var& bias, Index kh,
           Index kw, Index sh, Index sw, Index ph, Index pw);

// --- structured ops ---
// Splits axis 0 in half: first * sigmoid(second).
Var glu0(const Var& x);
// Per-channel standardization over all trailing dims: (x - mu) / sqrt(var + eps)
// with the population variance. x {C, ...}.
Var channel_standardize(const Var& x, double eps);
// Eq-style conditional instance normalization: gamma * standardized + beta,
// each channel scaled and shifted independently.
Var conditional_instance_norm(const Var& x, const Var& gamma, const Var& beta,
                              double eps = 1e-6);

// --- pixel shuffle ---
// {C, H, W} -> {C/f^2, H*f, W*f}; channel count must divide by f^2.
Var pixel_shuffle_2d(const Var& x, Index f);
Var pixel_unshuffle_2d(const Var& x, Index f);
// {C, T} -> {C/f, T*f}; channel count must divide by f.
Var pixel_shuffle_1d(const Var& x, Index f);
Var pixel_unshuffle_1d(const Var& x, Index f);

// --- layer modules ---
struct Linear {
  Var weight;  // {out, in}
  Var bias;    // {out}
  static Linear create(ParamSet& params, const std::string& name, Index in,
                       Index out, Rng& rng);
  static Linear attach(const ParamSet& params, const std::string& name);
  Var forward(const Var& x) const;  // {in} or {in, n}
};

struct Conv1d {
  Var weight;
  Var bias;
  Index k = 1, stride = 1, pad = 0;
  static Conv1d create(ParamSet& params, const std::string& name, Index in,
                       Index out, Index k, Index stride, Index pad, Rng& rng);
  Var forward(const Var& x) const;
};

struct Conv2d {
  Var weight;
  Var bias;
  Index kh = 1, kw = 1, sh = 1, sw = 1, ph = 0, pw = 0;
  static Conv2d create(ParamSet& params, const std::string& name, Index in,
                       Index out, Index kh, Index kw, Index sh, Index sw,
                       Index ph, Index pw, Rng& rng);
  Var forward(const Var& x) const;
};

struct GruLayer {
  Var w_ih;  // {3H, in}, gate order (r | z | n)
  Var w_hh;  // {3H, H}
  Var b_ih;  // {3H}
  Var b_hh;  // {3H}
  Index hidden = 0;
  static GruLayer create(ParamSet& params, const std::string& name, Index in,
                         Index hidden, Rng& rng);
  Var step(const Var& x, const Var& h) const;
};

struct GruStack {
  std::vector<GruLayer> layers;
  static GruStack create(ParamSet& params, const std::string& name, Index in,
                         Index hidden, Index num_layers, Rng& rng);
  // seq {T, in}; returns the final hidden state of the top layer {H}.
  Var last_hidden(const Var& seq) const;
};

// Inverted-dropout mask: entries are 0 with probability p, else 1/(1-p).
Tensor dropout_mask(const std::vector<Index>& shape, double p, Rng& rng);

}  // namespace zsvc::nn

#endif  // ZSVC_NN_LAYERS_H_
