// zsvc/nn/tensor.h

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

#ifndef ZSVC_NN_TENSOR_H_
#define ZSVC_NN_TENSOR_H_

#include <Eigen/Core>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "zsvc/common/error.h"
#include "zsvc/common/rng.h"

namespace zsvc::nn {

using Index = int64_t;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMajorMatrix>;
using ConstMatMap = Eigen::Map<const RowMajorMatrix>;
using VecMap = Eigen::Map<Eigen::ArrayXd>;
using ConstVecMap = Eigen::Map<const Eigen::ArrayXd>;

// Dense double tensor, flat row-major storage. Double precision throughout:
// training runs on CPU and the gradient oracles want float64 accuracy.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<Index> shape);
  Tensor(std::initializer_list<Index> shape)
      : Tensor(std::vector<Index>(shape)) {}

  static Tensor zeros(std::vector<Index> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<Index> shape, double value);
  static Tensor scalar(double value);
  static Tensor from(std::vector<Index> shape, std::vector<double> values);
  static Tensor uniform(std::vector<Index> shape, double lo, double hi, Rng& rng);
  static Tensor normal(std::vector<Index> shape, double stddev, Rng& rng);

  const std::vector<Index>& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(Index i) const { return shape_[static_cast<size_t>(i)]; }
  Index size() const { return data_.size(); }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  Eigen::ArrayXd& array() { return data_; }
  const Eigen::ArrayXd& array() const { return data_; }

  double& operator[](Index i) { return data_[i]; }
  double operator[](Index i) const { return data_[i]; }
  double& at(Index row, Index col) { return data_[row * cols() + col]; }
  double at(Index row, Index col) const { return data_[row * cols() + col]; }

  // 2-D views. rows()/cols() require rank <= 2; mat(r, c) reinterprets any
  // tensor whose element count is r*c.
  Index rows() const;
  Index cols() const;
  MatMap mat();
  ConstMatMap mat() const;
  MatMap mat(Index r, Index c);
  ConstMatMap mat(Index r, Index c) const;

  Tensor reshaped(std::vector<Index> shape) const;
  void fill(double value) { data_.setConstant(value); }
  void set_zero() { data_.setZero(); }
  bool all_finite() const { return data_.isFinite().all(); }

  double scalar_value() const {
    ZSVC_CHECK(size() == 1, ConfigError, "tensor is not a scalar");
    return data_[0];
  }

 private:
  std::vector<Index> shape_;
  Eigen::ArrayXd data_;
};

Index shape_size(const std::vector<Index>& shape);

}  // namespace zsvc::nn

#endif  // ZSVC_NN_TENSOR_H_
