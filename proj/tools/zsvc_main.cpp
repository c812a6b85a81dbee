// tools/zsvc_main.cpp

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

// zsvc: zero-shot voice conversion toolkit.
//
// Subcommands: preprocess, train-encoder, train, train-baseline, convert,
// evaluate, bench. A key=value config file (--config) overrides built-in
// defaults; command-line flags override the file.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
// divergence.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "zsvc/cli/commands.h"

namespace {

using zsvc::data::RunConfig;

void add_common_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--data-root", cfg.data_root, "Dataset root (one dir per speaker)");
  cmd->add_option("--work", cfg.work_dir, "Work directory for mels/embeddings/checkpoints/reports");
  cmd->add_option("--seed", cfg.seed, "Root seed; every subsystem derives from it");
  cmd->set_config("--config", "", "Key=value config file; flags override it");
}

void add_model_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--gen-base-channels", cfg.generator.base_channels);
  cmd->add_option("--gen-block-channels", cfg.generator.block_channels);
  cmd->add_option("--gen-blocks", cfg.generator.num_blocks);
  cmd->add_option("--disc-base-channels", cfg.discriminator.base_channels);
  cmd->add_option("--enc-hidden", cfg.encoder.hidden);
  cmd->add_option("--enc-layers", cfg.encoder.layers);
}

void add_training_options(CLI::App* cmd, RunConfig& cfg) {
  auto& t = cfg.training;
  cmd->add_option("--epochs", t.epochs);
  cmd->add_option("--steps-per-epoch", t.steps_per_epoch);
  cmd->add_option("--batch-size", t.batch_size);
  cmd->add_option("--g-lr", t.g_lr);
  cmd->add_option("--lr-grid", t.lr_grid, "Learning-rate range-test candidates");
  cmd->add_option("--lr-probe-steps", t.lr_probe_steps);
  cmd->add_option("--identity-weight", t.identity_weight);
  cmd->add_option("--identity-decay-steps", t.identity_decay_steps);
  cmd->add_option("--cycle-weight", t.cycle_weight);
  cmd->add_option("--clip-norm", t.clip_norm);
  cmd->add_option("--fixed-crop", t.fixed_crop_frames);
  cmd->add_option("--dropout-start-epoch", t.dropout_start_epoch);
  cmd->add_option("--checkpoint-interval", t.checkpoint_interval_epochs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zsvc: zero-shot voice conversion toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;

  // preprocess
  auto* preprocess = app.add_subcommand("preprocess", "Ingest a dataset and extract spectrograms");
  std::vector<std::string> holdout;
  std::vector<std::string> pairing;
  add_common_options(preprocess, cfg);
  preprocess->add_option("--holdout", holdout, "Speakers excluded from training (unseen)");
  preprocess->add_option("--pair", pairing,
                         "Two speakers whose same-named files become parallel pairs")
      ->expected(2);

  // train-encoder
  auto* train_enc = app.add_subcommand("train-encoder", "Train the speaker encoder");
  add_common_options(train_enc, cfg);
  add_model_options(train_enc, cfg);
  auto& et = cfg.encoder_training;
  train_enc->add_option("--enc-epochs", et.epochs);
  train_enc->add_option("--enc-steps-per-epoch", et.steps_per_epoch);
  train_enc->add_option("--enc-speakers-per-batch", et.speakers_per_batch);
  train_enc->add_option("--enc-utts-per-speaker", et.utts_per_speaker);
  train_enc->add_option("--enc-crop", et.crop_frames);
  train_enc->add_option("--enc-lr-start", et.lr_start);
  train_enc->add_option("--enc-lr-final", et.lr_final);

  // train
  auto* train = app.add_subcommand("train", "Train the conversion model");
  add_common_options(train, cfg);
  add_model_options(train, cfg);
  add_training_options(train, cfg);

  // train-baseline
  auto* train_base = app.add_subcommand("train-baseline", "Train the linear one-to-one baseline");
  add_common_options(train_base, cfg);
  add_training_options(train_base, cfg);

  // convert
  auto* convert = app.add_subcommand("convert", "Convert an utterance to a target voice");
  add_common_options(convert, cfg);
  zsvc::cli::ConvertRequest request;
  std::vector<std::string> src_utts, trg_utts, raw_embed_values;
  std::string raw_embed_file;
  convert->add_option("--input", request.source_wav, "Source wav")->required();
  convert->add_option("--output", request.output_wav, "Converted wav path")->required();
  convert->add_option("--source-speaker", request.source_speaker)->required();
  convert->add_option("--target-speaker", request.target_speaker);
  convert->add_option("--source-utterances", src_utts, "Wavs for the source embedding");
  convert->add_option("--target-utterances", trg_utts, "Wavs for the target embedding");
  convert->add_option("--raw-target-embedding", raw_embed_file,
                      "File with one float per line; used instead of target utterances");
  convert->add_flag("--no-vocoder", request.skip_vocoder, "Write only the spectrogram");
  convert->add_option("--vocoder-iterations", cfg.vocoder_iterations);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Objective evaluation reports");
  add_common_options(evaluate, cfg);
  std::vector<std::string> settings{"seen-to-seen"};
  evaluate->add_option("--settings", settings,
                       "Any of: seen-to-seen seen-to-unseen unseen-to-seen unseen-to-unseen");

  // bench
  auto* bench = app.add_subcommand("bench", "Wall-clock speed per second of audio");
  add_common_options(bench, cfg);
  add_model_options(bench, cfg);
  std::string stage = "generator";
  double seconds = 5.0;
  bool include_vocoder = false;
  bench->add_option("--stage", stage, "frontend | encoder | generator | full");
  bench->add_option("--seconds", seconds, "Input audio duration");
  bench->add_flag("--include-vocoder", include_vocoder);

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.finalize();
    if (preprocess->parsed()) {
      zsvc::data::IngestOptions opts;
      opts.seed = cfg.seed;
      opts.holdout_speakers = holdout;
      if (pairing.size() == 2) {
        opts.pair_source_speaker = pairing[0];
        opts.pair_target_speaker = pairing[1];
      }
      auto result = zsvc::cli::preprocess_command(cfg, opts);
      std::cout << "processed " << result.files_processed << " utterances from "
                << result.manifest.speakers.size() << " speakers\n";
      for (const auto& w : result.manifest.warnings) std::cerr << "warning: " << w << "\n";
    } else if (train_enc->parsed()) {
      auto stats = zsvc::cli::train_encoder_command(cfg);
      std::cout << "encoder trained: " << stats.losses.size() << " steps, final loss "
                << (stats.losses.empty() ? 0.0 : stats.losses.back()) << "\n";
    } else if (train->parsed()) {
      zsvc::cli::train_command(cfg);
      std::cout << "conversion model trained; checkpoints in "
                << cfg.checkpoint_dir().string() << "\n";
    } else if (train_base->parsed()) {
      auto stats = zsvc::cli::train_baseline_command(cfg);
      std::cout << "baseline trained: " << stats.losses.size() << " steps, final loss "
                << (stats.losses.empty() ? 0.0 : stats.losses.back()) << " (lr "
                << stats.lr_used << ")\n";
    } else if (convert->parsed()) {
      for (const auto& u : src_utts) request.source_utterances.emplace_back(u);
      for (const auto& u : trg_utts) request.target_utterances.emplace_back(u);
      if (!raw_embed_file.empty()) {
        std::ifstream in(raw_embed_file);
        if (!in.good())
          throw zsvc::ConfigError("cannot read raw embedding file: " + raw_embed_file);
        std::vector<double> vals;
        double v;
        while (in >> v) vals.push_back(v);
        Eigen::VectorXd e = Eigen::Map<Eigen::VectorXd>(
            vals.data(), static_cast<Eigen::Index>(vals.size()));
        request.raw_target_embedding = e;
      }
      auto result = zsvc::cli::convert_command(cfg, request);
      std::cout << "wrote " << result.mel_path.string();
      if (!request.skip_vocoder) std::cout << " and " << result.wav_path.string();
      std::cout << "\n";
    } else if (evaluate->parsed()) {
      auto result = zsvc::cli::evaluate_command(cfg, settings);
      for (size_t i = 0; i < result.reports.size(); ++i) {
        const auto agg = result.reports[i].aggregate();
        std::cout << result.reports[i].setting << ": " << result.reports[i].pairs.size()
                  << " pairs, MAE " << agg.mae << ", MSE " << agg.mse << ", cos "
                  << agg.cos_theta << ", e_norm " << agg.e_norm << " -> "
                  << result.report_files[i].string() << "\n";
      }
    } else if (bench->parsed()) {
      auto result = zsvc::cli::bench_command(cfg, stage, seconds, include_vocoder);
      std::cout << result.stage << ": " << result.speed.ms_per_second
                << " ms per second of audio (median over " << result.speed.run_ms.size()
                << " runs, " << seconds << " s input)\n";
    }
  } catch (const zsvc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
