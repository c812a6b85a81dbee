// zsvc/baseline/linear_model.h

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

#ifndef ZSVC_BASELINE_LINEAR_MODEL_H_
#define ZSVC_BASELINE_LINEAR_MODEL_H_

#include <filesystem>
#include <vector>

#include "zsvc/audio/mel.h"
#include "zsvc/nn/layers.h"
#include "zsvc/train/config.h"

namespace zsvc::baseline {

// One-to-one conversion baseline trained on parallel pairs: four
// convolutional layers over the spectrogram treated as a one-channel image,
// with (output channels, kernel) fixed at (200,5), (200,5), (100,3), (1,3)
// and same-padding in both dimensions. It uses no speaker embeddings
// anywhere.
class LinearBaseline {
 public:
  explicit LinearBaseline(uint64_t seed);

  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

  nn::Var forward(const nn::Var& x) const;  // {1, bins, T} -> {1, bins, T}
  audio::FrameMatrix convert(const audio::FrameMatrix& mel) const;

  void save(const std::filesystem::path& path, const std::string& meta_json) const;
  static LinearBaseline load(const std::filesystem::path& path);

 private:
  nn::ParamSet params_;
  nn::Conv2d c1_, c2_, c3_, c4_;
};

// Parallel source/target spectrogram pair (two renditions of the same
// words). Only baselines consume these; adversarial training never does.
struct ParallelPair {
  audio::FrameMatrix source;
  audio::FrameMatrix target;
};

struct BaselineTrainConfig {
  int64_t steps = 500;
  int batch_size = 1;
  double lr = 1e-3;
  std::vector<double> lr_grid;  // Smith range procedure when non-empty
  int lr_probe_steps = 20;
  uint64_t seed = 1234;
  // crop_min/max/step drive the variable-length sampling
  train::TrainingConfig crops;
};

struct BaselineTrainStats {
  std::vector<double> losses;  // mean-|error| per step
  std::vector<int> crop_lengths;
  double lr_used = 0.0;
};

// Mean-absolute-error regression from source crop to target crop with
// variable-length sampling; no time alignment is applied.
BaselineTrainStats train_linear_baseline(LinearBaseline& model,
                                         const std::vector<ParallelPair>& pairs,
                                         const BaselineTrainConfig& cfg);

}  // namespace zsvc::baseline

#endif  // ZSVC_BASELINE_LINEAR_MODEL_H_
