// zsvc/cli/commands.h

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

#ifndef ZSVC_CLI_COMMANDS_H_
#define ZSVC_CLI_COMMANDS_H_

#include <optional>
#include <string>
#include <vector>

#include "zsvc/baseline/linear_model.h"
#include "zsvc/data/manifest.h"
#include "zsvc/data/run_config.h"
#include "zsvc/eval/metrics.h"
#include "zsvc/eval/speed.h"
#include "zsvc/speaker/embedding_store.h"
#include "zsvc/speaker/encoder_trainer.h"
#include "zsvc/train/trainer.h"

namespace zsvc::cli {

// Work-area layout helpers.
std::filesystem::path mel_path_for(const data::RunConfig& cfg,
                                   const std::string& relative_utterance);
std::filesystem::path encoder_checkpoint(const data::RunConfig& cfg);
std::filesystem::path generator_checkpoint(const data::RunConfig& cfg);
std::filesystem::path discriminator_checkpoint(const data::RunConfig& cfg);
std::filesystem::path trainer_checkpoint(const data::RunConfig& cfg);
std::filesystem::path baseline_checkpoint(const data::RunConfig& cfg);

struct PreprocessResult {
  data::DatasetManifest manifest;
  int64_t files_processed = 0;
};

// Ingest + spectrogram extraction for every utterance; the manifest lands
// next to the data, spectrograms under work/mels/.
PreprocessResult preprocess_command(const data::RunConfig& cfg,
                                    const data::IngestOptions& options);

speaker::EncoderTrainStats train_encoder_command(const data::RunConfig& cfg);

// Adversarial training on the train split of non-holdout speakers, with
// per-speaker embeddings precomputed through the store.
void train_command(const data::RunConfig& cfg);

baseline::BaselineTrainStats train_baseline_command(const data::RunConfig& cfg);

struct ConvertRequest {
  std::filesystem::path source_wav;
  std::string source_speaker;
  std::vector<std::filesystem::path> source_utterances;  // for the embedding
  std::string target_speaker;
  std::vector<std::filesystem::path> target_utterances;
  // Synthetic-speaker path: use this unit vector instead of encoding target
  // utterances.
  std::optional<Eigen::VectorXd> raw_target_embedding;
  std::filesystem::path output_wav;
  bool skip_vocoder = false;
};

struct ConvertResult {
  std::filesystem::path wav_path;
  std::filesystem::path mel_path;
  std::filesystem::path provenance_path;
  audio::FrameMatrix converted;
};

// Frontend -> embedding lookup/compute -> pad -> generate -> trim ->
// vocoder. Never enters training; never needs a parallel target utterance.
ConvertResult convert_command(const data::RunConfig& cfg, const ConvertRequest& request);

struct EvaluateResult {
  std::vector<eval::MetricsReport> reports;
  std::vector<std::filesystem::path> report_files;
};

// Runs DTW-aligned metrics plus cyclic reconstruction for every requested
// seen/unseen pairing; one report per setting under work/reports/.
// Valid settings: seen-to-seen, seen-to-unseen, unseen-to-seen,
// unseen-to-unseen.
EvaluateResult evaluate_command(const data::RunConfig& cfg,
                                const std::vector<std::string>& settings);

struct BenchResult {
  std::string stage;
  eval::SpeedResult speed;
};

// stage in {frontend, encoder, generator, full}; `full` excludes the vocoder
// unless include_vocoder is set.
BenchResult bench_command(const data::RunConfig& cfg, const std::string& stage,
                          double audio_seconds, bool include_vocoder = false);

}  // namespace zsvc::cli

#endif  // ZSVC_CLI_COMMANDS_H_
