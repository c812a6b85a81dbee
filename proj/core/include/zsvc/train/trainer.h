// zsvc/train/trainer.h

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

#ifndef ZSVC_TRAIN_TRAINER_H_
#define ZSVC_TRAIN_TRAINER_H_

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zsvc/gan/discriminator.h"
#include "zsvc/gan/generator.h"
#include "zsvc/nn/optim.h"
#include "zsvc/train/config.h"
#include "zsvc/train/lr_probe.h"
#include "zsvc/train/sampler.h"

namespace zsvc::train {

// Non-parallel training data: utterances grouped by speaker, each speaker
// with a precomputed embedding. No utterance is ever paired with a target
// rendition.
struct GanDataset {
  struct Speaker {
    std::string id;
    Eigen::VectorXd embedding;
    std::vector<audio::FrameMatrix> utterances;
  };
  std::vector<Speaker> speakers;

  int64_t total_utterances() const {
    int64_t n = 0;
    for (const auto& s : speakers) n += static_cast<int64_t>(s.utterances.size());
    return n;
  }
};

struct StepRecord {
  int64_t step = 0;
  int64_t epoch = 0;
  double identity_loss = 0.0;
  double cycle_loss = 0.0;
  double g_adv_loss = 0.0;
  double d_adv_loss = 0.0;
  double total_g_loss = 0.0;
  double identity_weight = 0.0;
  double g_lr = 0.0;
  double d_lr = 0.0;
  double g_grad_norm_preclip = 0.0;
  double g_grad_norm = 0.0;  // post-clip
  double d_grad_norm_preclip = 0.0;
  double d_grad_norm = 0.0;
  int d_steps = 1;
  int crop_frames = 0;
  bool dropout_active = false;

  std::string to_json() const;
};

// The adversarial optimization engine. Enforced every step: global
// grad-norm clip on both networks, critic LR = disc_lr_ratio x generator LR,
// critic input dropout only after the configured epoch, and a periodic
// critic/generator iteration rebalance driven by the loss ratio.
class GanTrainer {
 public:
  GanTrainer(const gan::GeneratorConfig& gen_cfg,
             const gan::DiscriminatorConfig& disc_cfg, TrainingConfig cfg,
             GanDataset dataset);
  GanTrainer(GanTrainer&&) = default;

  // Full schedule: epochs x steps_per_epoch generator steps, with the LR
  // probe at the start (and periodically) when a grid is configured.
  void run();
  // Advances exactly n generator steps with the current LR.
  void run_steps(int64_t n);

  gan::Generator& generator() { return *generator_; }
  const gan::Generator& generator() const { return *generator_; }
  gan::Discriminator& discriminator() { return *discriminator_; }
  const gan::Discriminator& discriminator() const { return *discriminator_; }

  int64_t step() const { return step_; }
  int64_t epoch() const { return step_ / steps_per_epoch_; }
  int d_steps_per_g() const { return d_steps_per_g_; }
  double generator_lr() const { return g_lr_; }
  double current_identity_weight() const;
  bool dropout_active() const { return epoch() >= cfg_.dropout_start_epoch; }
  const std::vector<StepRecord>& log() const { return log_; }
  const TrainingConfig& config() const { return cfg_; }

  // NDJSON sink, one record per line per step.
  void set_log_path(const std::filesystem::path& path);
  // Where the last-known-good snapshot goes when a loss turns non-finite.
  void set_abort_dump_path(const std::filesystem::path& path) {
    abort_dump_path_ = path;
  }

  void save_checkpoint(const std::filesystem::path& path,
                       const std::string& extra_meta_json = "") const;
  static GanTrainer resume(const std::filesystem::path& path, GanDataset dataset);

 private:
  GanTrainer(const GanTrainer& other);  // deep copy for the LR probe

  void step_once();
  void maybe_rebalance();
  void maybe_reprobe();
  void snapshot_last_good();
  [[noreturn]] void abort_diverged(const std::string& what);

  gan::GeneratorConfig gen_cfg_;
  gan::DiscriminatorConfig disc_cfg_;
  TrainingConfig cfg_;
  std::shared_ptr<const GanDataset> dataset_;
  std::unique_ptr<gan::Generator> generator_;
  std::unique_ptr<gan::Discriminator> discriminator_;
  nn::Adam opt_g_, opt_d_;
  Rng rng_;
  int64_t step_ = 0;
  int64_t steps_per_epoch_ = 1;
  int d_steps_per_g_ = 1;
  double g_lr_ = 0.0;
  int64_t last_balance_epoch_ = 0;
  int64_t last_probe_epoch_ = 0;
  std::vector<double> window_g_adv_, window_d_adv_;
  std::vector<StepRecord> log_;
  std::optional<std::ofstream> log_file_;
  std::optional<std::filesystem::path> abort_dump_path_;
  std::unique_ptr<nn::NamedTensors> last_good_;
};

}  // namespace zsvc::train

#endif  // ZSVC_TRAIN_TRAINER_H_
