// zsvc/nn/tensor.cpp

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

#include "zsvc/nn/tensor.h"

#include <numeric>

namespace zsvc::nn {

Index shape_size(const std::vector<Index>& shape) {
  Index n = 1;
  for (Index d : shape) {
    ZSVC_CHECK(d >= 0, ConfigError, "negative tensor dimension");
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<Index> shape) : shape_(std::move(shape)) {
  data_ = Eigen::ArrayXd::Zero(shape_size(shape_));
}

Tensor Tensor::full(std::vector<Index> shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

Tensor Tensor::scalar(double value) {
  Tensor t({1});
  t[0] = value;
  return t;
}

Tensor Tensor::from(std::vector<Index> shape, std::vector<double> values) {
  Tensor t(std::move(shape));
  ZSVC_CHECK(static_cast<Index>(values.size()) == t.size(), ConfigError,
             "value count does not match tensor shape");
  for (Index i = 0; i < t.size(); ++i) t[i] = values[static_cast<size_t>(i)];
  return t;
}

Tensor Tensor::uniform(std::vector<Index> shape, double lo, double hi, Rng& rng) {
  Tensor t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

Tensor Tensor::normal(std::vector<Index> shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t[i] = rng.normal(0.0, stddev);
  return t;
}

Index Tensor::rows() const {
  ZSVC_CHECK(rank() >= 1 && rank() <= 2, ConfigError, "rows() needs rank 1 or 2");
  return shape_[0];
}

Index Tensor::cols() const {
  ZSVC_CHECK(rank() >= 1 && rank() <= 2, ConfigError, "cols() needs rank 1 or 2");
  return rank() == 2 ? shape_[1] : 1;
}

MatMap Tensor::mat() { return MatMap(data(), rows(), cols()); }
ConstMatMap Tensor::mat() const { return ConstMatMap(data(), rows(), cols()); }

MatMap Tensor::mat(Index r, Index c) {
  ZSVC_CHECK(r * c == size(), ConfigError, "mat(r, c) element count mismatch");
  return MatMap(data(), r, c);
}

ConstMatMap Tensor::mat(Index r, Index c) const {
  ZSVC_CHECK(r * c == size(), ConfigError, "mat(r, c) element count mismatch");
  return ConstMatMap(data(), r, c);
}

Tensor Tensor::reshaped(std::vector<Index> shape) const {
  ZSVC_CHECK(shape_size(shape) == size(), ConfigError, "reshape element count mismatch");
  Tensor t = *this;
  t.shape_ = std::move(shape);
  return t;
}

}  // namespace zsvc::nn
