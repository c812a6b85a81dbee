// zsvc/data/run_config.cpp

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

#include "zsvc/data/run_config.h"

#include <nlohmann/json.hpp>

namespace zsvc::data {

void RunConfig::finalize() {
  training.seed = seed;
  encoder_training.seed = seed;
  training.validate();
  generator.validate();
  discriminator.validate();
}

std::string RunConfig::to_json() const {
  nlohmann::json j;
  j["data_root"] = data_root.string();
  j["work_dir"] = work_dir.string();
  j["seed"] = seed;
  j["training"] = nlohmann::json::parse(training.to_json());
  j["generator"] = nlohmann::json::parse(generator.to_json());
  j["discriminator"] = nlohmann::json::parse(discriminator.to_json());
  j["encoder"] = {{"mel_bins", encoder.mel_bins},
                  {"hidden", encoder.hidden},
                  {"layers", encoder.layers},
                  {"embed_dim", encoder.embed_dim}};
  j["encoder_training"] = {{"speakers_per_batch", encoder_training.speakers_per_batch},
                           {"utts_per_speaker", encoder_training.utts_per_speaker},
                           {"crop_frames", encoder_training.crop_frames},
                           {"epochs", encoder_training.epochs},
                           {"steps_per_epoch", encoder_training.steps_per_epoch},
                           {"lr_start", encoder_training.lr_start},
                           {"lr_final", encoder_training.lr_final}};
  j["vocoder_iterations"] = vocoder_iterations;
  j["embedding_utterances"] = embedding_utterances;
  return j.dump();
}

std::string RunConfig::config_hash() const {
  const std::string canonical = to_json();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string RunConfig::provenance_json(const std::string& extra) const {
  nlohmann::json j = extra.empty() ? nlohmann::json::object()
                                   : nlohmann::json::parse(extra);
  j["seed"] = seed;
  j["config_hash"] = config_hash();
  return j.dump();
}

}  // namespace zsvc::data
