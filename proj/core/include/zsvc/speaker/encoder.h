// zsvc/speaker/encoder.h

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

#ifndef ZSVC_SPEAKER_ENCODER_H_
#define ZSVC_SPEAKER_ENCODER_H_

#include <filesystem>
#include <string>
#include <vector>

#include "zsvc/audio/mel.h"
#include "zsvc/nn/layers.h"
#include "zsvc/nn/serialize.h"

namespace zsvc::speaker {

inline constexpr int kEmbeddingDim = 256;

// Unit-norm voice identity vector. Random unit vectors of this dimension are
// valid synthetic speakers for augmentation.
struct SpeakerEmbedding {
  Eigen::VectorXd vec;  // kEmbeddingDim, unit norm
  std::string speaker_id;

  double norm() const { return vec.norm(); }
};

struct EncoderConfig {
  int mel_bins = audio::kMelBins;
  int hidden = 256;
  int layers = 3;
  int embed_dim = kEmbeddingDim;

  bool operator==(const EncoderConfig&) const = default;
  std::string to_json() const;
  static EncoderConfig from_json(const std::string& json);
};

// Stacked-GRU utterance encoder with a linear projection of the final hidden
// state, L2-normalized to the unit sphere.
class SpeakerEncoder {
 public:
  SpeakerEncoder(EncoderConfig cfg, uint64_t seed);

  const EncoderConfig& config() const { return cfg_; }
  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

  // Graph-building forward for training; seq is {T, mel_bins}.
  nn::Var forward(const nn::Var& seq) const;

  // Inference. Deterministic given parameters; rejects non-finite input.
  SpeakerEmbedding encode(const audio::MelSpectrogram& mel) const;

  // Mean of per-utterance embeddings, renormalized to unit length.
  SpeakerEmbedding average_embedding(
      const std::vector<audio::MelSpectrogram>& utterances) const;

  void save(const std::filesystem::path& path, const std::string& meta_json) const;
  static SpeakerEncoder load(const std::filesystem::path& path);
  // Loads weights into this encoder; throws ConfigError when the stored
  // architecture differs.
  void load_weights(const std::filesystem::path& path);

 private:
  EncoderConfig cfg_;
  nn::ParamSet params_;
  nn::GruStack gru_;
  nn::Linear proj_;
};

}  // namespace zsvc::speaker

#endif  // ZSVC_SPEAKER_ENCODER_H_
