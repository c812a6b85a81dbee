// zsvc/data/run_config.h

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

#ifndef ZSVC_DATA_RUN_CONFIG_H_
#define ZSVC_DATA_RUN_CONFIG_H_

#include <filesystem>
#include <string>

#include "zsvc/gan/discriminator.h"
#include "zsvc/gan/generator.h"
#include "zsvc/speaker/encoder.h"
#include "zsvc/speaker/encoder_trainer.h"
#include "zsvc/train/config.h"

namespace zsvc::data {

// Everything a command needs: paths, the root seed, and per-component
// configurations. One seed feeds all subsystems through namespaced
// derivations; the config hash is stamped into every artifact.
struct RunConfig {
  std::filesystem::path data_root = "data";
  std::filesystem::path work_dir = "work";
  uint64_t seed = 1234;

  train::TrainingConfig training;
  gan::GeneratorConfig generator;
  gan::DiscriminatorConfig discriminator;
  speaker::EncoderConfig encoder;
  speaker::EncoderTrainConfig encoder_training;

  int vocoder_iterations = 60;
  int embedding_utterances = 4;  // averaged per speaker

  std::filesystem::path mel_dir() const { return work_dir / "mels"; }
  std::filesystem::path embedding_dir() const { return work_dir / "embeddings"; }
  std::filesystem::path checkpoint_dir() const { return work_dir / "checkpoints"; }
  std::filesystem::path report_dir() const { return work_dir / "reports"; }
  std::filesystem::path manifest_path() const { return data_root / "manifest.json"; }

  // Propagates the root seed into the sub-configs.
  void finalize();
  std::string to_json() const;
  // FNV-1a of the canonical JSON; identifies the configuration in artifacts.
  std::string config_hash() const;
  std::string provenance_json(const std::string& extra = "") const;
};

}  // namespace zsvc::data

#endif  // ZSVC_DATA_RUN_CONFIG_H_
