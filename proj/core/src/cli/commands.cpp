// zsvc/cli/commands.cpp

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

#include "zsvc/cli/commands.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "zsvc/audio/vocoder.h"
#include "zsvc/audio/wav.h"

namespace zsvc::cli {

namespace {

using audio::FrameMatrix;
using audio::MelSpectrogram;

void ensure_dirs(const data::RunConfig& cfg) {
  for (const auto& d : {cfg.mel_dir(), cfg.embedding_dir(), cfg.checkpoint_dir(),
                        cfg.report_dir()}) {
    std::error_code ec;
    std::filesystem::create_directories(d, ec);
    ZSVC_CHECK(!ec, DataError, "cannot create work directory: " + d.string());
  }
}

data::DatasetManifest load_manifest(const data::RunConfig& cfg) {
  ZSVC_CHECK(std::filesystem::exists(cfg.manifest_path()), ConfigError,
             "no manifest at " + cfg.manifest_path().string() +
                 "; run the preprocess command first");
  return data::DatasetManifest::load(cfg.manifest_path());
}

MelSpectrogram load_utterance_mel(const data::RunConfig& cfg,
                                  const std::string& relative) {
  const auto path = mel_path_for(cfg, relative);
  ZSVC_CHECK(std::filesystem::exists(path), ConfigError,
             "missing spectrogram " + path.string() + "; run preprocess first");
  return audio::load_mel(path);
}

// Deterministic "arbitrary utterances" choice: the first N train-split
// utterances in sorted order.
std::vector<std::string> embedding_utterances_for(const data::SpeakerEntry& speaker,
                                                  int count) {
  std::vector<std::string> utts = speaker.train_utterances;
  if (utts.empty()) utts = speaker.test_utterances;
  if (static_cast<int>(utts.size()) > count)
    utts.resize(static_cast<size_t>(count));
  return utts;
}

speaker::SpeakerEmbedding embedding_for_speaker(const data::RunConfig& cfg,
                                                const speaker::SpeakerEncoder& encoder,
                                                speaker::EmbeddingStore& store,
                                                const data::SpeakerEntry& entry) {
  return store.get_or_compute(
      entry.id,
      [&]() {
        const auto utts = embedding_utterances_for(entry, cfg.embedding_utterances);
        std::vector<MelSpectrogram> mels;
        mels.reserve(utts.size());
        for (const auto& u : utts) mels.push_back(load_utterance_mel(cfg, u));
        speaker::SpeakerEmbedding e = encoder.average_embedding(mels);
        e.speaker_id = entry.id;
        return e;
      },
      embedding_utterances_for(entry, cfg.embedding_utterances));
}

speaker::SpeakerEncoder load_encoder(const data::RunConfig& cfg) {
  const auto path = encoder_checkpoint(cfg);
  ZSVC_CHECK(std::filesystem::exists(path), ConfigError,
             "missing encoder checkpoint " + path.string() +
                 "; run the train-encoder command first");
  return speaker::SpeakerEncoder::load(path);
}

gan::Generator load_generator(const data::RunConfig& cfg) {
  const auto path = generator_checkpoint(cfg);
  ZSVC_CHECK(std::filesystem::exists(path), ConfigError,
             "missing generator checkpoint " + path.string() +
                 "; run the train command first");
  return gan::Generator::load(path);
}

std::vector<std::string> training_speakers_from_meta(const std::filesystem::path& ckpt) {
  const nn::NamedTensors bundle = nn::load_named_tensors(ckpt);
  nlohmann::json meta = nlohmann::json::parse(bundle.meta_json);
  return meta.value("training_speakers", std::vector<std::string>{});
}

}  // namespace

std::filesystem::path mel_path_for(const data::RunConfig& cfg,
                                   const std::string& relative_utterance) {
  return cfg.mel_dir() / (relative_utterance + ".mel");
}

std::filesystem::path encoder_checkpoint(const data::RunConfig& cfg) {
  return cfg.checkpoint_dir() / "encoder.ckpt";
}
std::filesystem::path generator_checkpoint(const data::RunConfig& cfg) {
  return cfg.checkpoint_dir() / "generator.ckpt";
}
std::filesystem::path discriminator_checkpoint(const data::RunConfig& cfg) {
  return cfg.checkpoint_dir() / "discriminator.ckpt";
}
std::filesystem::path trainer_checkpoint(const data::RunConfig& cfg) {
  return cfg.checkpoint_dir() / "training_state.ckpt";
}
std::filesystem::path baseline_checkpoint(const data::RunConfig& cfg) {
  return cfg.checkpoint_dir() / "baseline.ckpt";
}

PreprocessResult preprocess_command(const data::RunConfig& cfg,
                                    const data::IngestOptions& options) {
  ensure_dirs(cfg);
  PreprocessResult result;
  result.manifest = data::ingest_dataset(cfg.data_root, options);
  result.manifest.save(cfg.manifest_path());

  std::vector<std::string> all_utts;
  for (const auto& spk : result.manifest.speakers) {
    for (const auto& u : spk.train_utterances) all_utts.push_back(u);
    for (const auto& u : spk.test_utterances) all_utts.push_back(u);
  }

  // Per-file extraction with deterministic output naming; files are
  // independent so a small worker pool splits them by index.
  const unsigned workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
  std::vector<std::string> errors(all_utts.size());
  auto process_range = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const std::string& rel = all_utts[i];
      try {
        const auto wav_path = cfg.data_root / rel;
        audio::Waveform wave = audio::load_waveform(wav_path);
        MelSpectrogram mel = audio::mel_spectrogram(wave);
        mel.source_id = rel;
        mel.speaker_id = std::filesystem::path(rel).begin()->string();
        const auto out_path = mel_path_for(cfg, rel);
        std::filesystem::create_directories(out_path.parent_path());
        audio::save_mel(out_path, mel);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };
  if (workers <= 1 || all_utts.size() < 2) {
    process_range(0, all_utts.size());
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (all_utts.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const size_t begin = std::min(all_utts.size(), static_cast<size_t>(w) * chunk);
      const size_t end = std::min(all_utts.size(), begin + chunk);
      if (begin < end) pool.emplace_back(process_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& err : errors)
    if (!err.empty()) throw DataError("preprocess failed: " + err);

  result.files_processed = static_cast<int64_t>(all_utts.size());
  return result;
}

speaker::EncoderTrainStats train_encoder_command(const data::RunConfig& cfg) {
  ensure_dirs(cfg);
  const data::DatasetManifest manifest = load_manifest(cfg);

  speaker::EncoderDataset dataset;
  for (const auto& spk : manifest.speakers) {
    if (spk.holdout) continue;
    speaker::EncoderDataset::Speaker s;
    s.id = spk.id;
    for (const auto& u : spk.train_utterances)
      s.utterances.push_back(load_utterance_mel(cfg, u).frames);
    dataset.speakers.push_back(std::move(s));
  }

  speaker::SpeakerEncoder encoder(cfg.encoder, derive_seed(cfg.seed, "encoder"));
  speaker::EncoderTrainStats stats =
      train_speaker_encoder(encoder, dataset, cfg.encoder_training);
  encoder.save(encoder_checkpoint(cfg), cfg.provenance_json());
  return stats;
}

void train_command(const data::RunConfig& cfg) {
  ensure_dirs(cfg);
  const data::DatasetManifest manifest = load_manifest(cfg);
  const speaker::SpeakerEncoder encoder = load_encoder(cfg);
  speaker::EmbeddingStore store(cfg.embedding_dir());

  train::GanDataset dataset;
  std::vector<std::string> training_speakers;
  for (const auto& spk : manifest.speakers) {
    if (spk.holdout) continue;
    train::GanDataset::Speaker s;
    s.id = spk.id;
    s.embedding = embedding_for_speaker(cfg, encoder, store, spk).vec;
    for (const auto& u : spk.train_utterances)
      s.utterances.push_back(load_utterance_mel(cfg, u).frames);
    dataset.speakers.push_back(std::move(s));
    training_speakers.push_back(spk.id);
  }

  train::GanTrainer trainer(cfg.generator, cfg.discriminator, cfg.training,
                            std::move(dataset));
  trainer.set_log_path(cfg.checkpoint_dir() / "train_log.ndjson");
  trainer.set_abort_dump_path(cfg.checkpoint_dir() / "diverged_last_good.ckpt");
  trainer.run();

  nlohmann::json extra;
  extra["training_speakers"] = training_speakers;
  const std::string meta = cfg.provenance_json(extra.dump());
  trainer.generator().save(generator_checkpoint(cfg), meta);
  trainer.discriminator().save(discriminator_checkpoint(cfg), meta);
  trainer.save_checkpoint(trainer_checkpoint(cfg), meta);
}

baseline::BaselineTrainStats train_baseline_command(const data::RunConfig& cfg) {
  ensure_dirs(cfg);
  const data::DatasetManifest manifest = load_manifest(cfg);
  ZSVC_CHECK(!manifest.parallel_pairs.empty(), ConfigError,
             "manifest has no parallel pairs; re-run preprocess with a speaker pairing");

  std::vector<baseline::ParallelPair> pairs;
  for (const auto& p : manifest.parallel_pairs) {
    baseline::ParallelPair pair;
    pair.source = load_utterance_mel(cfg, p.source).frames;
    pair.target = load_utterance_mel(cfg, p.target).frames;
    pairs.push_back(std::move(pair));
  }

  baseline::LinearBaseline model(derive_seed(cfg.seed, "baseline"));
  baseline::BaselineTrainConfig bcfg;
  bcfg.seed = cfg.seed;
  bcfg.crops = cfg.training;
  bcfg.steps = cfg.training.epochs *
               std::max<int64_t>(1, static_cast<int64_t>(pairs.size()));
  bcfg.lr = cfg.training.g_lr;
  bcfg.lr_grid = cfg.training.lr_grid;
  bcfg.lr_probe_steps = cfg.training.lr_probe_steps;
  baseline::BaselineTrainStats stats = train_linear_baseline(model, pairs, bcfg);
  model.save(baseline_checkpoint(cfg), cfg.provenance_json());
  return stats;
}

ConvertResult convert_command(const data::RunConfig& cfg, const ConvertRequest& request) {
  ensure_dirs(cfg);
  const speaker::SpeakerEncoder encoder = load_encoder(cfg);
  const gan::Generator generator = load_generator(cfg);
  ZSVC_CHECK(encoder.config().embed_dim == generator.config().embed_dim, ConfigError,
             "encoder and generator checkpoints disagree on embedding dimension");
  speaker::EmbeddingStore store(cfg.embedding_dir());

  auto embedding_from = [&](const std::string& speaker_id,
                            const std::vector<std::filesystem::path>& utts)
      -> speaker::SpeakerEmbedding {
    return store.get_or_compute(speaker_id, [&]() {
      ZSVC_CHECK(!utts.empty(), ConfigError,
                 "speaker '" + speaker_id +
                     "' is not in the embedding store and no utterances were given");
      std::vector<MelSpectrogram> mels;
      for (const auto& p : utts)
        mels.push_back(audio::mel_spectrogram(audio::load_waveform(p)));
      speaker::SpeakerEmbedding e = encoder.average_embedding(mels);
      e.speaker_id = speaker_id;
      return e;
    });
  };

  const uint64_t steps_before = nn::stats::optimizer_steps();

  speaker::SpeakerEmbedding source_embed =
      embedding_from(request.source_speaker, request.source_utterances);
  speaker::SpeakerEmbedding target_embed;
  if (request.raw_target_embedding) {
    Eigen::VectorXd v = *request.raw_target_embedding;
    ZSVC_CHECK(v.size() == generator.config().embed_dim, ConfigError,
               "raw target embedding has the wrong dimension");
    ZSVC_CHECK(v.allFinite() && v.norm() > 1e-12, ConfigError,
               "raw target embedding must be finite and nonzero");
    target_embed.vec = v / v.norm();
    target_embed.speaker_id =
        request.target_speaker.empty() ? "synthetic" : request.target_speaker;
  } else {
    target_embed = embedding_from(request.target_speaker, request.target_utterances);
  }

  const audio::Waveform wave = audio::load_waveform(request.source_wav);
  MelSpectrogram mel = audio::mel_spectrogram(wave);
  mel.source_id = request.source_wav.string();
  mel.speaker_id = request.source_speaker;

  const gan::ConditioningPair pair{source_embed.vec, target_embed.vec};
  const FrameMatrix converted = generator.generate_padded(mel.frames, pair);

  ConvertResult result;
  result.converted = converted;
  result.wav_path = request.output_wav;
  result.mel_path = request.output_wav.string() + ".mel";
  result.provenance_path = request.output_wav.string() + ".provenance.json";

  MelSpectrogram out_mel;
  out_mel.frames = converted;
  out_mel.source_id = request.source_wav.string();
  out_mel.speaker_id = target_embed.speaker_id;
  if (result.wav_path.has_parent_path())
    std::filesystem::create_directories(result.wav_path.parent_path());
  audio::save_mel(result.mel_path, out_mel);

  if (!request.skip_vocoder) {
    audio::GriffinLimVocoder vocoder(cfg.vocoder_iterations,
                                     derive_seed(cfg.seed, "vocoder"));
    audio::write_wav(result.wav_path, vocoder.synthesize(out_mel));
  }

  ZSVC_CHECK(nn::stats::optimizer_steps() == steps_before, ConfigError,
             "conversion must not update any parameters");

  nlohmann::json extra;
  extra["source_wav"] = request.source_wav.string();
  extra["source_speaker"] = source_embed.speaker_id;
  extra["target_speaker"] = target_embed.speaker_id;
  extra["generator_checkpoint"] = generator_checkpoint(cfg).string();
  extra["encoder_checkpoint"] = encoder_checkpoint(cfg).string();
  extra["vocoder_iterations"] = cfg.vocoder_iterations;
  extra["raw_target_embedding"] = request.raw_target_embedding.has_value();
  std::ofstream prov(result.provenance_path, std::ios::trunc);
  ZSVC_CHECK(prov.good(), DataError,
             "cannot write provenance: " + result.provenance_path.string());
  prov << cfg.provenance_json(extra.dump()) << "\n";
  return result;
}

EvaluateResult evaluate_command(const data::RunConfig& cfg,
                                const std::vector<std::string>& settings) {
  ensure_dirs(cfg);
  const data::DatasetManifest manifest = load_manifest(cfg);
  const speaker::SpeakerEncoder encoder = load_encoder(cfg);
  const gan::Generator generator = load_generator(cfg);
  speaker::EmbeddingStore store(cfg.embedding_dir());

  // Seen speakers are the ones the conversion model actually trained on,
  // recorded in its checkpoint; everyone else in the manifest is unseen.
  std::vector<std::string> seen = training_speakers_from_meta(generator_checkpoint(cfg));
  if (seen.empty())
    for (const auto& s : manifest.speakers)
      if (!s.holdout) seen.push_back(s.id);
  auto is_seen = [&seen](const std::string& id) {
    return std::find(seen.begin(), seen.end(), id) != seen.end();
  };

  bool has_unseen = false;
  for (const auto& s : manifest.speakers) has_unseen = has_unseen || !is_seen(s.id);

  EvaluateResult result;
  for (const std::string& setting : settings) {
    bool src_seen, trg_seen;
    if (setting == "seen-to-seen") {
      src_seen = trg_seen = true;
    } else if (setting == "seen-to-unseen") {
      src_seen = true;
      trg_seen = false;
    } else if (setting == "unseen-to-seen") {
      src_seen = false;
      trg_seen = true;
    } else if (setting == "unseen-to-unseen") {
      src_seen = trg_seen = false;
    } else {
      throw ConfigError("unknown evaluation setting: " + setting);
    }
    ZSVC_CHECK((src_seen && trg_seen) || has_unseen, ConfigError,
               "setting '" + setting + "' needs unseen speakers in the manifest");

    eval::MetricsReport report;
    report.setting = setting;
    report.seed = cfg.seed;
    report.config_hash = cfg.config_hash();
    report.reconstruction.emplace();

    for (const auto& src : manifest.speakers) {
      if (is_seen(src.id) != src_seen) continue;
      for (const auto& trg : manifest.speakers) {
        if (trg.id == src.id || is_seen(trg.id) != trg_seen) continue;
        const auto src_embed =
            embedding_for_speaker(cfg, encoder, store, src).vec;
        const auto trg_embed =
            embedding_for_speaker(cfg, encoder, store, trg).vec;
        const gan::ConditioningPair pair{src_embed, trg_embed};

        for (const auto& utt : src.test_utterances) {
          // Ground truth needs the target speaker's rendition of the same
          // words: match by file name, test split first.
          const std::string name = std::filesystem::path(utt).filename().string();
          auto match = [&name](const std::vector<std::string>& v) -> const std::string* {
            for (const auto& u : v)
              if (std::filesystem::path(u).filename().string() == name) return &u;
            return nullptr;
          };
          const std::string* trg_utt = match(trg.test_utterances);
          if (trg_utt == nullptr) trg_utt = match(trg.train_utterances);
          if (trg_utt == nullptr) continue;

          const MelSpectrogram src_mel = load_utterance_mel(cfg, utt);
          const MelSpectrogram trg_mel = load_utterance_mel(cfg, *trg_utt);
          const FrameMatrix converted = generator.generate_padded(src_mel.frames, pair);

          MelSpectrogram conv_mel;
          conv_mel.frames = converted;

          eval::PairMetrics row;
          row.source_id = src.id + "/" + name;
          row.target_id = trg.id + "/" + name;
          const eval::AlignmentPath path = eval::dtw_align(converted, trg_mel.frames);
          const eval::AlignedMetrics am = eval::aligned_metrics(
              converted, trg_mel.frames, path, audio::silence_mask(trg_mel));
          row.mae = am.mae;
          row.mse = am.mse;
          row.cos_theta = am.cos_theta;
          row.frames_evaluated = am.frames_evaluated;
          row.e_norm = eval::speaker_similarity(encoder, conv_mel, trg_mel);
          report.pairs.push_back(row);

          const eval::CyclicEvalResult cyc =
              eval::cyclic_reconstruction_eval(generator, encoder, src_mel.frames, pair);
          eval::PairMetrics rec_row = row;
          rec_row.mae = cyc.metrics.mae;
          rec_row.mse = cyc.metrics.mse;
          rec_row.cos_theta = cyc.metrics.cos_theta;
          rec_row.frames_evaluated = cyc.metrics.frames_evaluated;
          rec_row.e_norm = cyc.e_norm;
          report.reconstruction->push_back(rec_row);
        }
      }
    }

    auto by_id = [](const eval::PairMetrics& a, const eval::PairMetrics& b) {
      return std::tie(a.source_id, a.target_id) < std::tie(b.source_id, b.target_id);
    };
    std::sort(report.pairs.begin(), report.pairs.end(), by_id);
    std::sort(report.reconstruction->begin(), report.reconstruction->end(), by_id);

    const auto json_path = cfg.report_dir() / (setting + ".json");
    report.save(json_path);
    std::ofstream csv(cfg.report_dir() / (setting + ".csv"), std::ios::trunc);
    csv << report.to_csv();
    result.report_files.push_back(json_path);
    result.reports.push_back(std::move(report));
  }
  return result;
}

BenchResult bench_command(const data::RunConfig& cfg, const std::string& stage,
                          double audio_seconds, bool include_vocoder) {
  ZSVC_CHECK(stage == "frontend" || stage == "encoder" || stage == "generator" ||
                 stage == "full",
             ConfigError, "unknown benchmark stage: " + stage);

  // Deterministic synthetic test signal.
  audio::Waveform wave;
  wave.sample_rate = audio::kTargetSampleRate;
  const auto n = static_cast<size_t>(audio_seconds * audio::kTargetSampleRate);
  wave.samples.resize(n);
  Rng rng(derive_seed(cfg.seed, "bench-signal"));
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / audio::kTargetSampleRate;
    wave.samples[i] = 0.3 * std::sin(2.0 * M_PI * 150.0 * t) +
                      0.2 * std::sin(2.0 * M_PI * 420.0 * t) + 0.01 * rng.normal();
  }

  const MelSpectrogram mel = audio::mel_spectrogram(wave);
  speaker::SpeakerEncoder encoder(cfg.encoder, derive_seed(cfg.seed, "encoder"));
  gan::Generator generator(cfg.generator, derive_seed(cfg.seed, "gen"));
  Rng embed_rng(derive_seed(cfg.seed, "bench-embed"));
  Eigen::VectorXd e1(cfg.generator.embed_dim), e2(cfg.generator.embed_dim);
  for (int i = 0; i < cfg.generator.embed_dim; ++i) {
    e1(i) = embed_rng.normal();
    e2(i) = embed_rng.normal();
  }
  e1.normalize();
  e2.normalize();
  const gan::ConditioningPair pair{e1, e2};
  const FrameMatrix padded = audio::pad_frames_to_multiple(mel.frames, 4);

  std::function<void()> fn;
  if (stage == "frontend") {
    fn = [&]() { (void)audio::mel_spectrogram(wave); };
  } else if (stage == "encoder") {
    fn = [&]() { (void)encoder.encode(mel); };
  } else if (stage == "generator") {
    fn = [&]() { (void)generator.generate(padded, pair); };
  } else {
    audio::GriffinLimVocoder vocoder(cfg.vocoder_iterations,
                                     derive_seed(cfg.seed, "vocoder"));
    fn = [&, include_vocoder]() {
      MelSpectrogram m = audio::mel_spectrogram(wave);
      (void)encoder.encode(m);
      MelSpectrogram out;
      out.frames = audio::trim_frames(
          generator.generate(audio::pad_frames_to_multiple(m.frames, 4), pair),
          m.frames.rows());
      if (include_vocoder) (void)vocoder.synthesize(out);
    };
  }

  BenchResult result;
  result.stage = stage;
  result.speed = eval::speed_benchmark(fn, audio_seconds);
  return result;
}

}  // namespace zsvc::cli
