// zsvc/data/manifest.cpp

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

#include "zsvc/data/manifest.h"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "zsvc/common/error.h"
#include "zsvc/common/rng.h"

namespace zsvc::data {

const SpeakerEntry* DatasetManifest::find_speaker(const std::string& id) const {
  for (const auto& s : speakers)
    if (s.id == id) return &s;
  return nullptr;
}

std::string DatasetManifest::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["root"] = root;
  j["train_fraction"] = train_fraction;
  j["speakers"] = nlohmann::json::array();
  for (const auto& s : speakers) {
    j["speakers"].push_back({{"id", s.id},
                             {"train", s.train_utterances},
                             {"test", s.test_utterances},
                             {"holdout", s.holdout}});
  }
  j["parallel_pairs"] = nlohmann::json::array();
  for (const auto& p : parallel_pairs)
    j["parallel_pairs"].push_back({{"source", p.source}, {"target", p.target}});
  j["warnings"] = warnings;
  return j.dump(2);
}

DatasetManifest DatasetManifest::from_json(const std::string& json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad manifest json: ") + e.what());
  }
  DatasetManifest m;
  m.seed = j.value("seed", 0ull);
  m.root = j.value("root", "");
  m.train_fraction = j.value("train_fraction", 0.9);
  for (const auto& s : j.value("speakers", nlohmann::json::array())) {
    SpeakerEntry e;
    e.id = s.at("id").get<std::string>();
    e.train_utterances = s.value("train", std::vector<std::string>{});
    e.test_utterances = s.value("test", std::vector<std::string>{});
    e.holdout = s.value("holdout", false);
    m.speakers.push_back(std::move(e));
  }
  for (const auto& p : j.value("parallel_pairs", nlohmann::json::array()))
    m.parallel_pairs.push_back(
        {p.at("source").get<std::string>(), p.at("target").get<std::string>()});
  m.warnings = j.value("warnings", std::vector<std::string>{});
  return m;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  ZSVC_CHECK(out.good(), DataError, "cannot write manifest: " + path.string());
  out << to_json() << "\n";
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  ZSVC_CHECK(in.good(), DataError, "cannot read manifest: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

namespace {

bool is_audio_file(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav";
}

}  // namespace

DatasetManifest ingest_dataset(const std::filesystem::path& root,
                               const IngestOptions& options) {
  ZSVC_CHECK(std::filesystem::is_directory(root), DataError,
             "dataset root is not a directory: " + root.string());
  ZSVC_CHECK(options.train_fraction > 0.0 && options.train_fraction <= 1.0,
             ConfigError, "train fraction must be in (0, 1]");

  DatasetManifest manifest;
  manifest.seed = options.seed;
  manifest.root = root.string();
  manifest.train_fraction = options.train_fraction;

  std::vector<std::filesystem::path> speaker_dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_directory()) speaker_dirs.push_back(entry.path());
  std::sort(speaker_dirs.begin(), speaker_dirs.end());
  ZSVC_CHECK(!speaker_dirs.empty(), DataError,
             "no speaker directories under " + root.string());

  for (const auto& dir : speaker_dirs) {
    SpeakerEntry speaker;
    speaker.id = dir.filename().string();
    speaker.holdout =
        std::find(options.holdout_speakers.begin(), options.holdout_speakers.end(),
                  speaker.id) != options.holdout_speakers.end();

    std::vector<std::string> files;
    for (const auto& f : std::filesystem::directory_iterator(dir))
      if (f.is_regular_file() && is_audio_file(f.path()))
        files.push_back(speaker.id + "/" + f.path().filename().string());
    ZSVC_CHECK(!files.empty(), DataError,
               "speaker directory has no audio files: " + speaker.id);
    std::sort(files.begin(), files.end());

    if (files.size() == 1) {
      speaker.train_utterances = files;
      manifest.warnings.push_back("speaker '" + speaker.id +
                                  "' has a single utterance; placed in train");
    } else {
      Rng rng(derive_seed(options.seed, "split/" + speaker.id));
      rng.shuffle(files);
      auto n_train = static_cast<size_t>(
          std::llround(options.train_fraction * static_cast<double>(files.size())));
      n_train = std::clamp<size_t>(n_train, 1, files.size() - 1);
      speaker.train_utterances.assign(files.begin(),
                                      files.begin() + static_cast<long>(n_train));
      speaker.test_utterances.assign(files.begin() + static_cast<long>(n_train),
                                     files.end());
      std::sort(speaker.train_utterances.begin(), speaker.train_utterances.end());
      std::sort(speaker.test_utterances.begin(), speaker.test_utterances.end());
    }
    manifest.speakers.push_back(std::move(speaker));
  }

  if (!options.pair_source_speaker.empty() || !options.pair_target_speaker.empty()) {
    const SpeakerEntry* src = manifest.find_speaker(options.pair_source_speaker);
    const SpeakerEntry* trg = manifest.find_speaker(options.pair_target_speaker);
    ZSVC_CHECK(src != nullptr && trg != nullptr, ConfigError,
               "parallel pairing references unknown speakers");
    auto all_of = [](const SpeakerEntry& s) {
      std::vector<std::string> v = s.train_utterances;
      v.insert(v.end(), s.test_utterances.begin(), s.test_utterances.end());
      std::sort(v.begin(), v.end());
      return v;
    };
    const auto src_files = all_of(*src);
    const auto trg_files = all_of(*trg);
    for (const auto& su : src_files) {
      const std::string name = std::filesystem::path(su).filename().string();
      for (const auto& tu : trg_files) {
        if (std::filesystem::path(tu).filename().string() == name) {
          manifest.parallel_pairs.push_back({su, tu});
          break;
        }
      }
    }
    ZSVC_CHECK(!manifest.parallel_pairs.empty(), DataError,
               "no same-named utterances between the paired speakers");
  }
  return manifest;
}

}  // namespace zsvc::data
