// zsvc/speaker/encoder_trainer.h

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

#ifndef ZSVC_SPEAKER_ENCODER_TRAINER_H_
#define ZSVC_SPEAKER_ENCODER_TRAINER_H_

#include <string>
#include <vector>

#include "zsvc/speaker/encoder.h"

namespace zsvc::speaker {

struct EncoderDataset {
  struct Speaker {
    std::string id;
    std::vector<audio::FrameMatrix> utterances;  // each T x mel_bins
  };
  std::vector<Speaker> speakers;
};

struct EncoderTrainConfig {
  int speakers_per_batch = 8;
  int utts_per_speaker = 6;
  int crop_frames = 128;
  int64_t epochs = 8;
  int64_t steps_per_epoch = 0;  // 0: one step per full pass over all utterances
  double lr_start = 4e-4;
  double lr_final = 3e-7;  // reached in the final epoch (geometric anneal)
  double init_scale = 10.0;
  double init_bias = -5.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  uint64_t seed = 1234;
};

struct EncoderTrainStats {
  std::vector<double> losses;  // one per step
  std::vector<double> lrs;
  double scale_w = 0.0;
  double bias_b = 0.0;
};

// GE2E training over N-speaker x M-utterance batches of random fixed-length
// crops (shorter utterances are tiled). The learning rate anneals
// geometrically per epoch from lr_start to lr_final. Zero total steps leaves
// the parameters untouched.
EncoderTrainStats train_speaker_encoder(SpeakerEncoder& encoder,
                                        const EncoderDataset& dataset,
                                        const EncoderTrainConfig& cfg);

}  // namespace zsvc::speaker

#endif  // ZSVC_SPEAKER_ENCODER_TRAINER_H_
