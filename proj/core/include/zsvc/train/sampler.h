// zsvc/train/sampler.h

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

#ifndef ZSVC_TRAIN_SAMPLER_H_
#define ZSVC_TRAIN_SAMPLER_H_

#include "zsvc/audio/mel.h"
#include "zsvc/common/rng.h"
#include "zsvc/train/config.h"

namespace zsvc::train {

// Variable mode (for models robust to utterance length) draws k uniformly
// from {crop_min, crop_min+step, ..., crop_max}; fixed mode (the critic needs
// a fixed-size input) always uses fixed_crop_frames.
enum class CropMode { kVariable, kFixed };

int sample_crop_length(CropMode mode, const TrainingConfig& cfg, Rng& rng);

// Random k-frame crop at a random offset; utterances shorter than k are
// tiled before cropping.
audio::FrameMatrix sample_training_crop(const audio::FrameMatrix& mel,
                                        CropMode mode, const TrainingConfig& cfg,
                                        Rng& rng);
audio::FrameMatrix crop_frames_at(const audio::FrameMatrix& mel, int64_t start,
                                  int64_t length);

}  // namespace zsvc::train

#endif  // ZSVC_TRAIN_SAMPLER_H_
