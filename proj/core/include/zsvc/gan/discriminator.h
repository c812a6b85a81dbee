// zsvc/gan/discriminator.h

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

#ifndef ZSVC_GAN_DISCRIMINATOR_H_
#define ZSVC_GAN_DISCRIMINATOR_H_

#include <filesystem>
#include <string>

#include "zsvc/gan/generator.h"

namespace zsvc::gan {

// Projection critic: convolutional feature extractor, global sum pooling,
// a scalar base head, plus an inner product between the pooled features and
// a vector derived from the embedding pair. The projection path is the only
// way speaker identity reaches the output. Input crops must be exactly
// crop_frames long; there is no padding inside.
struct DiscriminatorConfig {
  int mel_bins = audio::kMelBins;
  int crop_frames = 256;
  int base_channels = 64;
  int embed_dim = speaker::kEmbeddingDim;
  int proj_hidden = 256;

  bool operator==(const DiscriminatorConfig&) const = default;
  void validate() const;
  std::string to_json() const;
  static DiscriminatorConfig from_json(const std::string& json);
};

class Discriminator {
 public:
  Discriminator(DiscriminatorConfig cfg, uint64_t seed);

  const DiscriminatorConfig& config() const { return cfg_; }
  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

  // Graph-building forward. x {1, mel_bins, crop_frames}; optional
  // inverted-dropout mask of the same shape is applied to the input
  // (training only).
  nn::Var forward(const nn::Var& x, const nn::Var& source_embed,
                  const nn::Var& target_embed,
                  const nn::Tensor* input_dropout_mask = nullptr) const;

  // Conv trunk output before pooling, and the global sum pooling over it;
  // exposed so the pooling contract is testable in isolation.
  nn::Var features(const nn::Var& x) const;
  static nn::Var global_sum_pool(const nn::Var& feature_map);

  // Inference-mode critic value. dropout_active requires an rng; with
  // dropout disabled repeated calls are identical.
  double discriminate(const audio::FrameMatrix& crop, const ConditioningPair& pair,
                      bool dropout_active = false, double dropout_prob = 0.3,
                      Rng* rng = nullptr) const;

  void save(const std::filesystem::path& path, const std::string& meta_json) const;
  static Discriminator load(const std::filesystem::path& path);
  void load_weights(const std::filesystem::path& path);

 private:
  DiscriminatorConfig cfg_;
  nn::ParamSet params_;
  nn::Conv2d entry_, down1_, down2_, down3_, post_;
  nn::Linear base_head_;
  nn::Linear proj1_, proj2_, proj3_;
};

}  // namespace zsvc::gan

#endif  // ZSVC_GAN_DISCRIMINATOR_H_
