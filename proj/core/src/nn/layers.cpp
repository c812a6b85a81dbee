// zsvc/nn/layers.cpp

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

#include "zsvc/nn/layers.h"

#include <cmath>

namespace zsvc::nn {

Var ParamSet::create(const std::string& name, Tensor init) {
  ZSVC_CHECK(!contains(name), ConfigError, "duplicate parameter name: " + name);
  Var v = Var::leaf(std::move(init), /*requires_grad=*/true);
  items_.emplace_back(name, v);
  return v;
}

const Var& ParamSet::find(const std::string& name) const {
  for (const auto& [n, v] : items_)
    if (n == name) return v;
  throw ConfigError("unknown parameter: " + name);
}

bool ParamSet::contains(const std::string& name) const {
  for (const auto& [n, v] : items_)
    if (n == name) return true;
  return false;
}

void ParamSet::zero_grad() {
  for (auto& [n, v] : items_) v.zero_grad();
}

Index ParamSet::total_size() const {
  Index total = 0;
  for (const auto& [n, v] : items_) total += v.size();
  return total;
}

bool ParamSet::all_finite() const {
  for (const auto& [n, v] : items_)
    if (!v.value().all_finite()) return false;
  return true;
}

void ParamSet::copy_values_from(const ParamSet& other) {
  ZSVC_CHECK(items_.size() == other.items_.size(), ConfigError,
             "parameter set structure mismatch");
  for (size_t i = 0; i < items_.size(); ++i) {
    ZSVC_CHECK(items_[i].first == other.items_[i].first &&
                   items_[i].second.value().same_shape(other.items_[i].second.value()),
               ConfigError, "parameter set structure mismatch");
    items_[i].second.node()->value = other.items_[i].second.value();
  }
}

// ---------------------------------------------------------------------------
// Convolution. im2col + GEMM; the backward pass recomputes the column matrix
// from the retained input instead of keeping it alive.
// ---------------------------------------------------------------------------

namespace {

Index conv_out_dim(Index n, Index k, Index stride, Index pad) {
  return (n + 2 * pad - k) / stride + 1;
}

Tensor im2col_1d(const Tensor& x, Index k, Index stride, Index pad, Index to) {
  const Index cin = x.dim(0), t = x.dim(1);
  Tensor col({cin * k, to});
  for (Index c = 0; c < cin; ++c) {
    const double* xrow = x.data() + c * t;
    for (Index dk = 0; dk < k; ++dk) {
      double* crow = col.data() + (c * k + dk) * to;
      for (Index o = 0; o < to; ++o) {
        const Index src = o * stride + dk - pad;
        crow[o] = (src >= 0 && src < t) ? xrow[src] : 0.0;
      }
    }
  }
  return col;
}

void col2im_1d(const Tensor& dcol, Index cin, Index t, Index k, Index stride,
               Index pad, Index to, Tensor& dx) {
  for (Index c = 0; c < cin; ++c) {
    double* xrow = dx.data() + c * t;
    for (Index dk = 0; dk < k; ++dk) {
      const double* crow = dcol.data() + (c * k + dk) * to;
      for (Index o = 0; o < to; ++o) {
        const Index dst = o * stride + dk - pad;
        if (dst >= 0 && dst < t) xrow[dst] += crow[o];
      }
    }
  }
}

Tensor im2col_2d(const Tensor& x, Index kh, Index kw, Index sh, Index sw,
                 Index ph, Index pw, Index ho, Index wo) {
  const Index cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor col({cin * kh * kw, ho * wo});
  for (Index c = 0; c < cin; ++c) {
    const double* xc = x.data() + c * h * w;
    for (Index dy = 0; dy < kh; ++dy) {
      for (Index dx_ = 0; dx_ < kw; ++dx_) {
        double* crow = col.data() + ((c * kh + dy) * kw + dx_) * (ho * wo);
        for (Index oy = 0; oy < ho; ++oy) {
          const Index sy = oy * sh + dy - ph;
          double* cr = crow + oy * wo;
          if (sy < 0 || sy >= h) {
            for (Index ox = 0; ox < wo; ++ox) cr[ox] = 0.0;
            continue;
          }
          const double* xr = xc + sy * w;
          for (Index ox = 0; ox < wo; ++ox) {
            const Index sx = ox * sw + dx_ - pw;
            cr[ox] = (sx >= 0 && sx < w) ? xr[sx] : 0.0;
          }
        }
      }
    }
  }
  return col;
}

void col2im_2d(const Tensor& dcol, Index cin, Index h, Index w, Index kh,
               Index kw, Index sh, Index sw, Index ph, Index pw, Index ho,
               Index wo, Tensor& dx) {
  for (Index c = 0; c < cin; ++c) {
    double* xc = dx.data() + c * h * w;
    for (Index dy = 0; dy < kh; ++dy) {
      for (Index dx_ = 0; dx_ < kw; ++dx_) {
        const double* crow = dcol.data() + ((c * kh + dy) * kw + dx_) * (ho * wo);
        for (Index oy = 0; oy < ho; ++oy) {
          const Index sy = oy * sh + dy - ph;
          if (sy < 0 || sy >= h) continue;
          const double* cr = crow + oy * wo;
          double* xr = xc + sy * w;
          for (Index ox = 0; ox < wo; ++ox) {
            const Index sx = ox * sw + dx_ - pw;
            if (sx >= 0 && sx < w) xr[sx] += cr[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Var conv1d(const Var& x, const Var& weight, const Var& bias, Index k,
           Index stride, Index pad) {
  const Tensor& xv = x.value();
  ZSVC_CHECK(xv.rank() == 2, ConfigError, "conv1d: input must be {C, T}");
  const Index cin = xv.dim(0), t = xv.dim(1);
  const Index cout = weight.value().dim(0);
  ZSVC_CHECK(weight.value().dim(1) == cin * k, ConfigError,
             "conv1d: weight shape mismatch");
  const Index to = conv_out_dim(t, k, stride, pad);
  ZSVC_CHECK(to >= 1, ConfigError, "conv1d: input too short for kernel");

  Tensor col = im2col_1d(xv, k, stride, pad, to);
  Tensor out({cout, to});
  out.mat().noalias() = weight.value().mat() * col.mat();
  out.mat().colwise() += Eigen::Map<const Eigen::VectorXd>(bias.value().data(), cout);

  return make_op(std::move(out), {x, weight, bias},
                 [cin, t, k, stride, pad, to, cout](Node& self) {
    Node* px = self.parents[0].get();
    Node* pw = self.parents[1].get();
    Node* pb = self.parents[2].get();
    ConstMatMap g(self.grad.data(), cout, to);
    if (pw->requires_grad) {
      Tensor col = im2col_1d(px->value, k, stride, pad, to);
      pw->ensure_grad();
      MatMap(pw->grad.data(), cout, cin * k).noalias() += g * col.mat().transpose();
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      Eigen::Map<Eigen::VectorXd>(pb->grad.data(), cout) += g.rowwise().sum();
    }
    if (px->requires_grad) {
      Tensor dcol({cin * k, to});
      dcol.mat().noalias() =
          ConstMatMap(pw->value.data(), cout, cin * k).transpose() * g;
      px->ensure_grad();
      col2im_1d(dcol, cin, t, k, stride, pad, to, px->grad);
    }
  });
}

Var conv2d(const Var& x, const Var& weight, const Var& bias, Index kh,
           Index kw, Index sh, Index sw, Index ph, Index pw) {
  const Tensor& xv = x.value();
  ZSVC_CHECK(xv.rank() == 3, ConfigError, "conv2d: input must be {C, H, W}");
  const Index cin = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
  const Index cout = weight.value().dim(0);
  ZSVC_CHECK(weight.value().dim(1) == cin * kh * kw, ConfigError,
             "conv2d: weight shape mismatch");
  const Index ho = conv_out_dim(h, kh, sh, ph);
  const Index wo = conv_out_dim(w, kw, sw, pw);
  ZSVC_CHECK(ho >= 1 && wo >= 1, ConfigError, "conv2d: input too small for kernel");

  Tensor col = im2col_2d(xv, kh, kw, sh, sw, ph, pw, ho, wo);
  Tensor out({cout, ho, wo});
  out.mat(cout, ho * wo).noalias() = weight.value().mat() * col.mat();
  out.mat(cout, ho * wo).colwise() +=
      Eigen::Map<const Eigen::VectorXd>(bias.value().data(), cout);

  return make_op(std::move(out), {x, weight, bias},
                 [cin, h, w, kh, kw, sh, sw, ph, pw, ho, wo, cout](Node& self) {
    Node* px = self.parents[0].get();
    Node* pwt = self.parents[1].get();
    Node* pb = self.parents[2].get();
    ConstMatMap g(self.grad.data(), cout, ho * wo);
    if (pwt->requires_grad) {
      Tensor col = im2col_2d(px->value, kh, kw, sh, sw, ph, pw, ho, wo);
      pwt->ensure_grad();
      MatMap(pwt->grad.data(), cout, cin * kh * kw).noalias() +=
          g * col.mat().transpose();
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      Eigen::Map<Eigen::VectorXd>(pb->grad.data(), cout) += g.rowwise().sum();
    }
    if (px->requires_grad) {
      Tensor dcol({cin * kh * kw, ho * wo});
      dcol.mat().noalias() =
          ConstMatMap(pwt->value.data(), cout, cin * kh * kw).transpose() * g;
      px->ensure_grad();
      col2im_2d(dcol, cin, h, w, kh, kw, sh, sw, ph, pw, ho, wo, px->grad);
    }
  });
}

// ---------------------------------------------------------------------------
// Gated linear unit and channel normalization.
// ---------------------------------------------------------------------------

Var glu0(const Var& x) {
  const Tensor& xv = x.value();
  ZSVC_CHECK(xv.rank() >= 1 && xv.shape()[0] % 2 == 0, ConfigError,
             "glu: leading dimension must be even");
  const Index c = xv.shape()[0] / 2;
  const Index inner = xv.size() / (2 * c);
  std::vector<Index> out_shape = xv.shape();
  out_shape[0] = c;
  Tensor out(out_shape);
  auto a = xv.array().segment(0, c * inner);
  auto b = xv.array().segment(c * inner, c * inner);
  out.array() = a * (1.0 / (1.0 + (-b).exp()));
  return make_op(std::move(out), {x}, [c, inner](Node& self) {
    Node* px = self.parents[0].get();
    if (!px->requires_grad) return;
    auto a = px->value.array().segment(0, c * inner);
    auto b = px->value.array().segment(c * inner, c * inner);
    Eigen::ArrayXd sig = 1.0 / (1.0 + (-b).exp());
    Tensor& dx = px->ensure_grad();
    dx.array().segment(0, c * inner) += self.grad.array() * sig;
    dx.array().segment(c * inner, c * inner) +=
        self.grad.array() * a * sig * (1.0 - sig);
  });
}

Var channel_standardize(const Var& x, double eps) {
  const Tensor& xv = x.value();
  ZSVC_CHECK(xv.rank() >= 2, ConfigError, "channel_standardize: rank must be >= 2");
  const Index c = xv.shape()[0];
  const Index inner = xv.size() / c;
  ZSVC_CHECK(inner >= 1, ConfigError, "channel_standardize: empty channels");

  Tensor out(xv.shape());
  Eigen::ArrayXd inv_sigma(c);
  for (Index ch = 0; ch < c; ++ch) {
    auto seg = xv.array().segment(ch * inner, inner);
    const double mu = seg.mean();
    const double var = (seg - mu).square().mean();
    const double is = 1.0 / std::sqrt(var + eps);
    inv_sigma[ch] = is;
    out.array().segment(ch * inner, inner) = (seg - mu) * is;
  }
  return make_op(std::move(out), {x}, [c, inner, inv_sigma](Node& self) {
    Node* px = self.parents[0].get();
    if (!px->requires_grad) return;
    Tensor& dx = px->ensure_grad();
    for (Index ch = 0; ch < c; ++ch) {
      auto g = self.grad.array().segment(ch * inner, inner);
      auto y = self.value.array().segment(ch * inner, inner);
      const double gm = g.mean();
      const double gym = (g * y).mean();
      dx.array().segment(ch * inner, inner) += inv_sigma[ch] * (g - gm - y * gym);
    }
  });
}

Var conditional_instance_norm(const Var& x, const Var& gamma, const Var& beta,
                              double eps) {
  return add_channel(scale_channel(channel_standardize(x, eps), gamma), beta);
}

// ---------------------------------------------------------------------------
// Pixel shuffle. Pure index permutations.
// ---------------------------------------------------------------------------

namespace {

// Applies out[perm[i]] = in[i]; backward scatters with the inverse map.
Var permute_op(const Var& x, std::vector<Index> dest, std::vector<Index> out_shape) {
  Tensor out(std::move(out_shape));
  const Tensor& xv = x.value();
  for (Index i = 0; i < xv.size(); ++i) out[dest[static_cast<size_t>(i)]] = xv[i];
  return make_op(std::move(out), {x}, [dest](Node& self) {
    Node* px = self.parents[0].get();
    if (!px->requires_grad) return;
    Tensor& dx = px->ensure_grad();
    for (Index i = 0; i < dx.size(); ++i)
      dx[i] += self.grad[dest[static_cast<size_t>(i)]];
  });
}

}  // namespace

Var pixel_shuffle_2d(const Var& x, Index f) {
  const Tensor& xv = x.value();
  ZSVC_CHECK(xv.rank() == 3, ConfigError, "pixel_shuffle_2d: input must be {C, H, W}");
  ZSVC_CHECK(f >= 1, ConfigError, "pixel_shuffle_2d: factor must be >= 1");
  const Index c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
  ZSVC_CHECK(c % (f * f) == 0, ConfigError,
             "pixel_shuffle_2d: channels not divisible by f^2");
  const Index co = c / (f * f), ho = h * f, wo = w * f;
  std::vector<Index> dest(static_cast<size_t>(xv.size()));
  for (Index ci = 0; ci < c; ++ci) {
    const Index cdst = ci / (f * f);
    const Index dy = (ci / f) % f, dx_ = ci % f;
    for (Index y = 0; y < h; ++y)
      for (Index z = 0; z < w; ++z)
        dest[static_cast<size_t>((ci * h + y) * w + z)] =
            (cdst * ho + (y * f + dy)) * wo + (z * f + dx_);
  }
  return permute_op(x, std::move(dest), {co, ho, wo});
}

Var pixel_unshuffle_2d(const Var& x, Index f) {
  const Tensor& xv = x.value();
  ZSVC_CHECK(xv.rank() == 3, ConfigError, "pixel_unshuffle_2d: input must be {C, H, W}");
  ZSVC_CHECK(f >= 1, ConfigError, "pixel_unshuffle_2d: factor must be >= 1");
  const Index c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
  ZSVC_CHECK(h % f == 0 && w % f == 0, ConfigError,
             "pixel_unshuffle_2d: spatial dims not divisible by f");
  const Index co = c * f * f, ho = h / f, wo = w / f;
  std::vector<Index> dest(static_cast<size_t>(xv.size()));
  for (Index ci = 0; ci < c; ++ci)
    for (Index y = 0; y < h; ++y)
      for (Index z = 0; z < w; ++z) {
        const Index cdst = (ci * f + (y % f)) * f + (z % f);
        dest[static_cast<size_t>((ci * h + y) * w + z)] =
            (cdst * ho + y / f) * wo + z / f;
      }
  return permute_op(x, std::move(dest), {co, ho, wo});
}

Var pixel_shuffle_1d(const Var& x, Index f) {
  const Tensor& xv = x.value();
  ZSVC_CHECK(xv.rank() == 2, ConfigError, "pixel_shuffle_1d: input must be {C, T}");
  ZSVC_CHECK(f >= 1, ConfigError, "pixel_shuffle_1d: factor must be >= 1");
  const Index c = xv.dim(0), t = xv.dim(1);
  ZSVC_CHECK(c % f == 0, ConfigError, "pixel_shuffle_1d: channels not divisible by f");
  const Index co = c / f, to = t * f;
  std::vector<Index> dest(static_cast<size_t>(xv.size()));
  for (Index ci = 0; ci < c; ++ci)
    for (Index j = 0; j < t; ++j)
      dest[static_cast<size_t>(ci * t + j)] =
          (ci / f) * to + (j * f + ci % f);
  return permute_op(x, std::move(dest), {co, to});
}

Var pixel_unshuffle_1d(const Var& x, Index f) {
  const Tensor& xv = x.value();
  ZSVC_CHECK(xv.rank() == 2, ConfigError, "pixel_unshuffle_1d: input must be {C, T}");
  ZSVC_CHECK(f >= 1, ConfigError, "pixel_unshuffle_1d: factor must be >= 1");
  const Index c = xv.dim(0), t = xv.dim(1);
  ZSVC_CHECK(t % f == 0, ConfigError,
             "pixel_unshuffle_1d: length not divisible by f");
  const Index co = c * f, to = t / f;
  std::vector<Index> dest(static_cast<size_t>(xv.size()));
  for (Index ci = 0; ci < c; ++ci)
    for (Index j = 0; j < t; ++j)
      dest[static_cast<size_t>(ci * t + j)] =
          (ci * f + j % f) * to + j / f;
  return permute_op(x, std::move(dest), {co, to});
}

// ---------------------------------------------------------------------------
// Layer modules.
// ---------------------------------------------------------------------------

namespace {

Tensor fan_in_uniform(std::vector<Index> shape, Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return Tensor::uniform(std::move(shape), -bound, bound, rng);
}

}  // namespace

Linear Linear::create(ParamSet& params, const std::string& name, Index in,
                      Index out, Rng& rng) {
  Linear l;
  l.weight = params.create(name + ".weight", fan_in_uniform({out, in}, in, rng));
  l.bias = params.create(name + ".bias", fan_in_uniform({out}, in, rng));
  return l;
}

Linear Linear::attach(const ParamSet& params, const std::string& name) {
  Linear l;
  l.weight = params.find(name + ".weight");
  l.bias = params.find(name + ".bias");
  return l;
}

Var Linear::forward(const Var& x) const {
  Var y = matmul(weight, x);
  if (y.value().rank() == 1) return add(y, bias);
  return add_channel(y, bias);
}

Conv1d Conv1d::create(ParamSet& params, const std::string& name, Index in,
                      Index out, Index k, Index stride, Index pad, Rng& rng) {
  Conv1d c;
  c.k = k;
  c.stride = stride;
  c.pad = pad;
  c.weight = params.create(name + ".weight",
                           fan_in_uniform({out, in * k}, in * k, rng));
  c.bias = params.create(name + ".bias", fan_in_uniform({out}, in * k, rng));
  return c;
}

Var Conv1d::forward(const Var& x) const {
  return conv1d(x, weight, bias, k, stride, pad);
}

Conv2d Conv2d::create(ParamSet& params, const std::string& name, Index in,
                      Index out, Index kh, Index kw, Index sh, Index sw,
                      Index ph, Index pw, Rng& rng) {
  Conv2d c;
  c.kh = kh;
  c.kw = kw;
  c.sh = sh;
  c.sw = sw;
  c.ph = ph;
  c.pw = pw;
  const Index fan_in = in * kh * kw;
  c.weight = params.create(name + ".weight",
                           fan_in_uniform({out, fan_in}, fan_in, rng));
  c.bias = params.create(name + ".bias", fan_in_uniform({out}, fan_in, rng));
  return c;
}

Var Conv2d::forward(const Var& x) const {
  return conv2d(x, weight, bias, kh, kw, sh, sw, ph, pw);
}

GruLayer GruLayer::create(ParamSet& params, const std::string& name, Index in,
                          Index hidden, Rng& rng) {
  GruLayer g;
  g.hidden = hidden;
  g.w_ih = params.create(name + ".w_ih", fan_in_uniform({3 * hidden, in}, hidden, rng));
  g.w_hh = params.create(name + ".w_hh",
                         fan_in_uniform({3 * hidden, hidden}, hidden, rng));
  g.b_ih = params.create(name + ".b_ih", fan_in_uniform({3 * hidden}, hidden, rng));
  g.b_hh = params.create(name + ".b_hh", fan_in_uniform({3 * hidden}, hidden, rng));
  return g;
}

Var GruLayer::step(const Var& x, const Var& h) const {
  const Index H = hidden;
  Var gi = add(matmul(w_ih, x), b_ih);
  Var gh = add(matmul(w_hh, h), b_hh);
  Var r = sigmoid(add(slice0(gi, 0, H), slice0(gh, 0, H)));
  Var z = sigmoid(add(slice0(gi, H, H), slice0(gh, H, H)));
  Var n = tanh_(add(slice0(gi, 2 * H, H), mul(r, slice0(gh, 2 * H, H))));
  // h' = (1 - z) * n + z * h
  return add(n, mul(z, sub(h, n)));
}

GruStack GruStack::create(ParamSet& params, const std::string& name, Index in,
                          Index hidden, Index num_layers, Rng& rng) {
  GruStack s;
  for (Index l = 0; l < num_layers; ++l) {
    s.layers.push_back(GruLayer::create(params, name + ".l" + std::to_string(l),
                                        l == 0 ? in : hidden, hidden, rng));
  }
  return s;
}

Var GruStack::last_hidden(const Var& seq) const {
  ZSVC_CHECK(seq.value().rank() == 2, ConfigError, "gru: input must be {T, in}");
  const Index t_len = seq.value().dim(0);
  ZSVC_CHECK(t_len >= 1, ConfigError, "gru: empty sequence");
  std::vector<Var> h(layers.size());
  for (size_t l = 0; l < layers.size(); ++l)
    h[l] = Var::constant(Tensor({layers[l].hidden}));
  for (Index t = 0; t < t_len; ++t) {
    Var x = row(seq, t);
    for (size_t l = 0; l < layers.size(); ++l) {
      h[l] = layers[l].step(x, h[l]);
      x = h[l];
    }
  }
  return h.back();
}

Tensor dropout_mask(const std::vector<Index>& shape, double p, Rng& rng) {
  ZSVC_CHECK(p >= 0.0 && p < 1.0, ConfigError, "dropout probability out of range");
  Tensor mask(shape);
  const double keep_scale = 1.0 / (1.0 - p);
  for (Index i = 0; i < mask.size(); ++i)
    mask[i] = rng.bernoulli(p) ? 0.0 : keep_scale;
  return mask;
}

}  // namespace zsvc::nn
