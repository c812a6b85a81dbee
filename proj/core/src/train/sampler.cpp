// zsvc/train/sampler.cpp

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

#include "zsvc/train/sampler.h"

#include "zsvc/common/error.h"

namespace zsvc::train {

int sample_crop_length(CropMode mode, const TrainingConfig& cfg, Rng& rng) {
  if (mode == CropMode::kFixed) return cfg.fixed_crop_frames;
  const int64_t choices = (cfg.crop_max - cfg.crop_min) / cfg.crop_step + 1;
  return cfg.crop_min + static_cast<int>(rng.randint(0, choices - 1)) * cfg.crop_step;
}

audio::FrameMatrix crop_frames_at(const audio::FrameMatrix& mel, int64_t start,
                                  int64_t length) {
  ZSVC_CHECK(start >= 0 && length >= 1 && start + length <= mel.rows(), ConfigError,
             "crop out of range");
  return mel.middleRows(start, length);
}

audio::FrameMatrix sample_training_crop(const audio::FrameMatrix& mel,
                                        CropMode mode, const TrainingConfig& cfg,
                                        Rng& rng) {
  ZSVC_CHECK(mel.rows() >= 1, DataError, "cannot crop an empty spectrogram");
  const int k = sample_crop_length(mode, cfg, rng);
  const int64_t t = mel.rows();
  if (t >= k) {
    const int64_t start = rng.randint(0, t - k);
    return crop_frames_at(mel, start, k);
  }
  // Tile the utterance until it covers k, then crop at a random phase.
  const int64_t reps = (2 * k + t - 1) / t;
  audio::FrameMatrix tiled(reps * t, mel.cols());
  for (int64_t r = 0; r < reps; ++r) tiled.middleRows(r * t, t) = mel;
  const int64_t start = rng.randint(0, tiled.rows() - k);
  return crop_frames_at(tiled, start, k);
}

}  // namespace zsvc::train
