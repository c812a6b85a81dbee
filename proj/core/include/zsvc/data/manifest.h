// zsvc/data/manifest.h

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

#ifndef ZSVC_DATA_MANIFEST_H_
#define ZSVC_DATA_MANIFEST_H_

#include <filesystem>
#include <string>
#include <vector>

namespace zsvc::data {

// Per-speaker utterance lists with a deterministic train/test split.
// Utterance paths are relative to the dataset root. Holdout speakers are
// excluded from conversion-model training entirely; they are the unseen
// speakers for zero-shot evaluation.
struct SpeakerEntry {
  std::string id;
  std::vector<std::string> train_utterances;
  std::vector<std::string> test_utterances;
  bool holdout = false;
};

struct ParallelEntry {
  std::string source;  // relative utterance paths
  std::string target;
};

struct DatasetManifest {
  uint64_t seed = 0;
  std::string root;
  double train_fraction = 0.9;
  std::vector<SpeakerEntry> speakers;
  std::vector<ParallelEntry> parallel_pairs;
  std::vector<std::string> warnings;

  const SpeakerEntry* find_speaker(const std::string& id) const;
  std::string to_json() const;
  static DatasetManifest from_json(const std::string& json);
  void save(const std::filesystem::path& path) const;
  static DatasetManifest load(const std::filesystem::path& path);
};

struct IngestOptions {
  uint64_t seed = 1234;
  double train_fraction = 0.9;
  std::vector<std::string> holdout_speakers;
  // When both are set, audio files with identical names in the two speakers'
  // directories become parallel pairs for the one-to-one baselines.
  std::string pair_source_speaker;
  std::string pair_target_speaker;
};

// Scans root (one subdirectory of audio files per speaker) into a manifest
// with a seeded per-speaker 90/10 split. A speaker directory with no audio
// raises an ingestion error naming the speaker; a speaker with one utterance
// puts it in train and records a warning.
DatasetManifest ingest_dataset(const std::filesystem::path& root,
                               const IngestOptions& options);

}  // namespace zsvc::data

#endif  // ZSVC_DATA_MANIFEST_H_
