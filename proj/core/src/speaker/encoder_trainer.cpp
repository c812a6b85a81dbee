// zsvc/speaker/encoder_trainer.cpp

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

#include "zsvc/speaker/encoder_trainer.h"

#include <cmath>

#include "zsvc/nn/optim.h"
#include "zsvc/speaker/ge2e.h"

namespace zsvc::speaker {

namespace {

// Random fixed-length crop; utterances shorter than the crop are tiled.
nn::Tensor crop_utterance(const audio::FrameMatrix& mel, int crop, Rng& rng) {
  const int64_t t = mel.rows();
  const int64_t bins = mel.cols();
  nn::Tensor out({crop, bins});
  if (t >= crop) {
    const int64_t start = rng.randint(0, t - crop);
    for (int64_t r = 0; r < crop; ++r)
      for (int64_t c = 0; c < bins; ++c) out[r * bins + c] = mel(start + r, c);
  } else {
    const int64_t start = rng.randint(0, t - 1);
    for (int64_t r = 0; r < crop; ++r) {
      const int64_t src = (start + r) % t;
      for (int64_t c = 0; c < bins; ++c) out[r * bins + c] = mel(src, c);
    }
  }
  return out;
}

}  // namespace

EncoderTrainStats train_speaker_encoder(SpeakerEncoder& encoder,
                                        const EncoderDataset& dataset,
                                        const EncoderTrainConfig& cfg) {
  const int n = cfg.speakers_per_batch;
  const int m = cfg.utts_per_speaker;
  ZSVC_CHECK(n >= 2 && m >= 2, ConfigError,
             "encoder training needs >= 2 speakers and >= 2 utterances per batch");
  ZSVC_CHECK(static_cast<int>(dataset.speakers.size()) >= n, DataError,
             "dataset has fewer speakers than a batch requires");
  int64_t total_utts = 0;
  for (const auto& spk : dataset.speakers) {
    ZSVC_CHECK(static_cast<int>(spk.utterances.size()) >= m, DataError,
               "speaker '" + spk.id + "' has fewer utterances than a batch requires");
    total_utts += static_cast<int64_t>(spk.utterances.size());
  }

  const int64_t steps_per_epoch =
      cfg.steps_per_epoch > 0
          ? cfg.steps_per_epoch
          : std::max<int64_t>(1, total_utts / (static_cast<int64_t>(n) * m));

  EncoderTrainStats stats;
  stats.scale_w = cfg.init_scale;
  stats.bias_b = cfg.init_bias;
  if (cfg.epochs <= 0) return stats;

  // Similarity scale/bias are trained jointly with the encoder weights.
  nn::ParamSet sim_params;
  nn::Var scale_w = sim_params.create("scale_w", nn::Tensor::scalar(cfg.init_scale));
  nn::Var bias_b = sim_params.create("bias_b", nn::Tensor::scalar(cfg.init_bias));

  nn::Adam opt_encoder(cfg.adam_beta1, cfg.adam_beta2);
  nn::Adam opt_sim(cfg.adam_beta1, cfg.adam_beta2);
  Rng rng(derive_seed(cfg.seed, "encoder-training"));

  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double frac = cfg.epochs > 1
                            ? static_cast<double>(epoch) / (cfg.epochs - 1)
                            : 0.0;
    const double lr = cfg.lr_start * std::pow(cfg.lr_final / cfg.lr_start, frac);
    for (int64_t s = 0; s < steps_per_epoch; ++s) {
      // Sample N distinct speakers, M distinct utterances each.
      std::vector<size_t> speaker_idx(dataset.speakers.size());
      for (size_t i = 0; i < speaker_idx.size(); ++i) speaker_idx[i] = i;
      rng.shuffle(speaker_idx);
      speaker_idx.resize(static_cast<size_t>(n));

      std::vector<std::vector<nn::Var>> embeddings(static_cast<size_t>(n));
      for (int j = 0; j < n; ++j) {
        const auto& spk = dataset.speakers[speaker_idx[static_cast<size_t>(j)]];
        std::vector<size_t> utt_idx(spk.utterances.size());
        for (size_t i = 0; i < utt_idx.size(); ++i) utt_idx[i] = i;
        rng.shuffle(utt_idx);
        for (int i = 0; i < m; ++i) {
          nn::Var seq = nn::Var::constant(crop_utterance(
              spk.utterances[utt_idx[static_cast<size_t>(i)]], cfg.crop_frames, rng));
          embeddings[static_cast<size_t>(j)].push_back(encoder.forward(seq));
        }
      }

      nn::Var loss = ge2e_loss(embeddings, scale_w, bias_b);
      const double loss_value = loss.scalar_value();
      ZSVC_CHECK(std::isfinite(loss_value), DivergenceError,
                 "non-finite ge2e loss at step " +
                     std::to_string(stats.losses.size()));
      encoder.params().zero_grad();
      sim_params.zero_grad();
      nn::backward(loss);
      opt_encoder.step(encoder.params(), lr);
      opt_sim.step(sim_params, lr);
      // Keep the similarity scale positive.
      if (scale_w.value()[0] < 1e-4) scale_w.node()->value[0] = 1e-4;

      stats.losses.push_back(loss_value);
      stats.lrs.push_back(lr);
    }
  }
  stats.scale_w = scale_w.value()[0];
  stats.bias_b = bias_b.value()[0];
  return stats;
}

}  // namespace zsvc::speaker
