// zsvc/train/config.h

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

#ifndef ZSVC_TRAIN_CONFIG_H_
#define ZSVC_TRAIN_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

namespace zsvc::train {

struct TrainingConfig {
  // Loss weights. The identity weight decays linearly to identity_weight_final
  // over identity_decay_steps (0 keeps it constant); the cycle weight stays
  // fixed.
  double identity_weight = 5.0;
  double identity_weight_final = 0.0;
  int64_t identity_decay_steps = 10000;
  double cycle_weight = 10.0;

  // Least-squares adversarial targets: critic output is pushed toward
  // real_target on real data and fake_target on generated data.
  double real_target = 1.0;
  double fake_target = 0.0;

  // Stabilization: global gradient-norm clip on both networks, critic LR
  // locked to a fixed fraction of the generator LR, input dropout on the
  // critic after a warmup, and a critic/generator iteration balance
  // controller.
  double clip_norm = 1.0;
  double disc_lr_ratio = 0.5;
  int64_t dropout_start_epoch = 3000;
  double dropout_prob = 0.3;

  // Frame cropping. Variable mode draws from {crop_min..crop_max} in
  // crop_step multiples; fixed mode always uses fixed_crop_frames.
  int crop_min = 96;
  int crop_max = 320;
  int crop_step = 32;
  int fixed_crop_frames = 256;

  // Critic loss should sit around (generator adversarial loss) /
  // balance_target; outside [ratio_low, ratio_high] x target the
  // critic-steps-per-generator-step count is adjusted within
  // [d_steps_min, d_steps_max] every balance_interval_epochs.
  double balance_target = 10.0;
  double balance_ratio_high = 0.15;
  double balance_ratio_low = 0.05;
  int64_t balance_interval_epochs = 500;
  int d_steps_min = 1;
  int d_steps_max = 5;

  uint64_t seed = 1234;
  int64_t epochs = 1;
  int64_t steps_per_epoch = 0;  // 0: one pass over the training utterances
  int batch_size = 1;

  // Learning rate: fixed g_lr, or chosen from lr_grid by the range probe
  // (and re-probed every lr_probe_interval_epochs when > 0).
  double g_lr = 2e-4;
  std::vector<double> lr_grid;
  int lr_probe_steps = 200;
  int64_t lr_probe_interval_epochs = 0;

  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;

  int64_t checkpoint_interval_epochs = 0;  // 0: only on request/abort
  int64_t abort_snapshot_interval_steps = 50;

  void validate() const;
  std::string to_json() const;
  static TrainingConfig from_json(const std::string& json);
};

}  // namespace zsvc::train

#endif  // ZSVC_TRAIN_CONFIG_H_
