// zsvc/gan/generator.h

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

#ifndef ZSVC_GAN_GENERATOR_H_
#define ZSVC_GAN_GENERATOR_H_

#include <filesystem>
#include <string>
#include <vector>

#include "zsvc/audio/mel.h"
#include "zsvc/nn/layers.h"
#include "zsvc/speaker/encoder.h"

namespace zsvc::gan {

struct ConditioningPair {
  Eigen::VectorXd source;  // unit-norm embedding
  Eigen::VectorXd target;
};

// 2D conv downsampling, a 1D conditional core, 2D pixel-shuffle upsampling.
// Channel widths derive from base_channels; the conditional core runs at
// block_channels. mel_bins must be divisible by 4 (two stride-2 stages).
struct GeneratorConfig {
  int mel_bins = audio::kMelBins;
  int base_channels = 64;
  int block_channels = 256;
  int num_blocks = 6;
  int embed_dim = speaker::kEmbeddingDim;

  bool operator==(const GeneratorConfig&) const = default;
  void validate() const;
  std::string to_json() const;
  static GeneratorConfig from_json(const std::string& json);
};

class Generator {
 public:
  Generator(GeneratorConfig cfg, uint64_t seed);

  const GeneratorConfig& config() const { return cfg_; }
  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

  // Graph-building forward. x {1, mel_bins, T} with T a multiple of 4;
  // embeddings {embed_dim} each.
  nn::Var forward(const nn::Var& x, const nn::Var& source_embed,
                  const nn::Var& target_embed) const;

  // One conditional core stage: conv -> conditional instance norm (scale and
  // shift from two linear maps on the embedding pair) -> gated linear unit.
  // x {block_channels, T'}, cond {2*embed_dim}.
  nn::Var conditional_block(int index, const nn::Var& x, const nn::Var& cond) const;

  // Inference on a T x mel_bins spectrogram. Requires T % 4 == 0 (see
  // audio::pad_frames_to_multiple) and finite inputs; output has the input's
  // shape.
  audio::FrameMatrix generate(const audio::FrameMatrix& mel,
                              const ConditioningPair& pair) const;

  // Pad -> generate -> trim convenience for arbitrary-length input.
  audio::FrameMatrix generate_padded(const audio::FrameMatrix& mel,
                                     const ConditioningPair& pair) const;

  void save(const std::filesystem::path& path, const std::string& meta_json) const;
  static Generator load(const std::filesystem::path& path);
  void load_weights(const std::filesystem::path& path);

 private:
  struct Block {
    nn::Conv1d conv;
    nn::Linear scale;  // gamma from [source || target]
    nn::Linear shift;  // beta
  };

  GeneratorConfig cfg_;
  nn::ParamSet params_;
  nn::Conv2d entry_, down1_, down2_;
  nn::Conv1d to_core_, from_core_;
  std::vector<Block> blocks_;
  nn::Conv2d up1_, up2_, out_;
};

// {T, bins} row-major spectrogram <-> {1, bins, T} network tensor.
nn::Tensor frames_to_input(const audio::FrameMatrix& mel);
audio::FrameMatrix input_to_frames(const nn::Tensor& x);
nn::Tensor embedding_to_tensor(const Eigen::VectorXd& v);

}  // namespace zsvc::gan

#endif  // ZSVC_GAN_GENERATOR_H_
