// zsvc/train/config.cpp

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

#include "zsvc/train/config.h"

#include <nlohmann/json.hpp>

#include "zsvc/common/error.h"

namespace zsvc::train {

void TrainingConfig::validate() const {
  ZSVC_CHECK(identity_weight >= 0.0 && identity_weight_final >= 0.0 &&
                 cycle_weight >= 0.0,
             ConfigError, "loss weights must be non-negative");
  ZSVC_CHECK(real_target != fake_target, ConfigError,
             "adversarial targets must differ");
  ZSVC_CHECK(clip_norm > 0.0, ConfigError, "clip_norm must be positive");
  ZSVC_CHECK(disc_lr_ratio > 0.0, ConfigError, "disc_lr_ratio must be positive");
  ZSVC_CHECK(dropout_prob >= 0.0 && dropout_prob < 1.0, ConfigError,
             "dropout_prob must be in [0, 1)");
  ZSVC_CHECK(crop_step > 0 && crop_min <= crop_max, ConfigError,
             "bad crop range");
  ZSVC_CHECK(crop_min >= 96 && crop_max <= 320 && crop_min % 32 == 0 &&
                 crop_max % 32 == 0 && crop_step % 32 == 0,
             ConfigError,
             "crop lengths must be multiples of 32 within [96, 320]");
  ZSVC_CHECK(fixed_crop_frames >= 8 && fixed_crop_frames % 4 == 0, ConfigError,
             "fixed crop must be a multiple of 4 and >= 8");
  ZSVC_CHECK(balance_target > 0.0 &&
                 balance_ratio_low < balance_ratio_high,
             ConfigError, "bad balance controller settings");
  ZSVC_CHECK(d_steps_min >= 1 && d_steps_min <= d_steps_max, ConfigError,
             "bad critic step bounds");
  ZSVC_CHECK(batch_size >= 1, ConfigError, "batch_size must be >= 1");
  ZSVC_CHECK(g_lr > 0.0, ConfigError, "g_lr must be positive");
  for (double lr : lr_grid)
    ZSVC_CHECK(lr > 0.0, ConfigError, "lr grid entries must be positive");
  ZSVC_CHECK(lr_probe_steps >= 1, ConfigError, "lr_probe_steps must be >= 1");
  ZSVC_CHECK(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 &&
                 adam_beta2 < 1.0,
             ConfigError, "optimizer moment coefficients must be in [0, 1)");
}

std::string TrainingConfig::to_json() const {
  nlohmann::json j;
  j["identity_weight"] = identity_weight;
  j["identity_weight_final"] = identity_weight_final;
  j["identity_decay_steps"] = identity_decay_steps;
  j["cycle_weight"] = cycle_weight;
  j["real_target"] = real_target;
  j["fake_target"] = fake_target;
  j["clip_norm"] = clip_norm;
  j["disc_lr_ratio"] = disc_lr_ratio;
  j["dropout_start_epoch"] = dropout_start_epoch;
  j["dropout_prob"] = dropout_prob;
  j["crop_min"] = crop_min;
  j["crop_max"] = crop_max;
  j["crop_step"] = crop_step;
  j["fixed_crop_frames"] = fixed_crop_frames;
  j["balance_target"] = balance_target;
  j["balance_ratio_high"] = balance_ratio_high;
  j["balance_ratio_low"] = balance_ratio_low;
  j["balance_interval_epochs"] = balance_interval_epochs;
  j["d_steps_min"] = d_steps_min;
  j["d_steps_max"] = d_steps_max;
  j["seed"] = seed;
  j["epochs"] = epochs;
  j["steps_per_epoch"] = steps_per_epoch;
  j["batch_size"] = batch_size;
  j["g_lr"] = g_lr;
  j["lr_grid"] = lr_grid;
  j["lr_probe_steps"] = lr_probe_steps;
  j["lr_probe_interval_epochs"] = lr_probe_interval_epochs;
  j["adam_beta1"] = adam_beta1;
  j["adam_beta2"] = adam_beta2;
  j["checkpoint_interval_epochs"] = checkpoint_interval_epochs;
  j["abort_snapshot_interval_steps"] = abort_snapshot_interval_steps;
  return j.dump();
}

TrainingConfig TrainingConfig::from_json(const std::string& json) {
  nlohmann::json j = nlohmann::json::parse(json);
  TrainingConfig c;
  c.identity_weight = j.value("identity_weight", c.identity_weight);
  c.identity_weight_final = j.value("identity_weight_final", c.identity_weight_final);
  c.identity_decay_steps = j.value("identity_decay_steps", c.identity_decay_steps);
  c.cycle_weight = j.value("cycle_weight", c.cycle_weight);
  c.real_target = j.value("real_target", c.real_target);
  c.fake_target = j.value("fake_target", c.fake_target);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.disc_lr_ratio = j.value("disc_lr_ratio", c.disc_lr_ratio);
  c.dropout_start_epoch = j.value("dropout_start_epoch", c.dropout_start_epoch);
  c.dropout_prob = j.value("dropout_prob", c.dropout_prob);
  c.crop_min = j.value("crop_min", c.crop_min);
  c.crop_max = j.value("crop_max", c.crop_max);
  c.crop_step = j.value("crop_step", c.crop_step);
  c.fixed_crop_frames = j.value("fixed_crop_frames", c.fixed_crop_frames);
  c.balance_target = j.value("balance_target", c.balance_target);
  c.balance_ratio_high = j.value("balance_ratio_high", c.balance_ratio_high);
  c.balance_ratio_low = j.value("balance_ratio_low", c.balance_ratio_low);
  c.balance_interval_epochs = j.value("balance_interval_epochs", c.balance_interval_epochs);
  c.d_steps_min = j.value("d_steps_min", c.d_steps_min);
  c.d_steps_max = j.value("d_steps_max", c.d_steps_max);
  c.seed = j.value("seed", c.seed);
  c.epochs = j.value("epochs", c.epochs);
  c.steps_per_epoch = j.value("steps_per_epoch", c.steps_per_epoch);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.g_lr = j.value("g_lr", c.g_lr);
  c.lr_grid = j.value("lr_grid", c.lr_grid);
  c.lr_probe_steps = j.value("lr_probe_steps", c.lr_probe_steps);
  c.lr_probe_interval_epochs = j.value("lr_probe_interval_epochs", c.lr_probe_interval_epochs);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.checkpoint_interval_epochs = j.value("checkpoint_interval_epochs", c.checkpoint_interval_epochs);
  c.abort_snapshot_interval_steps = j.value("abort_snapshot_interval_steps", c.abort_snapshot_interval_steps);
  return c;
}

}  // namespace zsvc::train
