// zsvc/speaker/encoder.cpp

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

#include "zsvc/speaker/encoder.h"

#include <nlohmann/json.hpp>

namespace zsvc::speaker {

std::string EncoderConfig::to_json() const {
  nlohmann::json j;
  j["mel_bins"] = mel_bins;
  j["hidden"] = hidden;
  j["layers"] = layers;
  j["embed_dim"] = embed_dim;
  return j.dump();
}

EncoderConfig EncoderConfig::from_json(const std::string& json) {
  nlohmann::json j = nlohmann::json::parse(json);
  EncoderConfig cfg;
  cfg.mel_bins = j.at("mel_bins").get<int>();
  cfg.hidden = j.at("hidden").get<int>();
  cfg.layers = j.at("layers").get<int>();
  cfg.embed_dim = j.at("embed_dim").get<int>();
  return cfg;
}

SpeakerEncoder::SpeakerEncoder(EncoderConfig cfg, uint64_t seed) : cfg_(cfg) {
  ZSVC_CHECK(cfg_.mel_bins >= 1 && cfg_.hidden >= 1 && cfg_.layers >= 1 &&
                 cfg_.embed_dim >= 1,
             ConfigError, "bad encoder configuration");
  Rng rng(derive_seed(seed, "speaker-encoder-init"));
  gru_ = nn::GruStack::create(params_, "gru", cfg_.mel_bins, cfg_.hidden,
                              cfg_.layers, rng);
  proj_ = nn::Linear::create(params_, "proj", cfg_.hidden, cfg_.embed_dim, rng);
}

nn::Var SpeakerEncoder::forward(const nn::Var& seq) const {
  ZSVC_CHECK(seq.value().rank() == 2 && seq.value().dim(1) == cfg_.mel_bins,
             ConfigError, "encoder input must be {T, mel_bins}");
  return nn::l2_normalize(proj_.forward(gru_.last_hidden(seq)));
}

SpeakerEmbedding SpeakerEncoder::encode(const audio::MelSpectrogram& mel) const {
  ZSVC_CHECK(mel.num_frames() >= 1, DataError, "cannot encode an empty spectrogram");
  ZSVC_CHECK(mel.all_finite(), DataError, "non-finite values in encoder input");
  nn::NoGradGuard no_grad;
  nn::Tensor seq({mel.num_frames(), static_cast<nn::Index>(mel.frames.cols())});
  std::copy(mel.frames.data(), mel.frames.data() + mel.frames.size(), seq.data());
  nn::Var out = forward(nn::Var::constant(std::move(seq)));
  SpeakerEmbedding e;
  e.speaker_id = mel.speaker_id;
  e.vec = Eigen::Map<const Eigen::VectorXd>(out.value().data(), out.size());
  return e;
}

SpeakerEmbedding SpeakerEncoder::average_embedding(
    const std::vector<audio::MelSpectrogram>& utterances) const {
  ZSVC_CHECK(!utterances.empty(), ConfigError,
             "average_embedding needs at least one utterance");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(cfg_.embed_dim);
  for (const auto& mel : utterances) acc += encode(mel).vec;
  acc /= static_cast<double>(utterances.size());
  const double n = acc.norm();
  ZSVC_CHECK(n > 1e-12, DataError, "averaged embedding collapsed to zero");
  SpeakerEmbedding e;
  e.speaker_id = utterances.front().speaker_id;
  e.vec = acc / n;
  return e;
}

void SpeakerEncoder::save(const std::filesystem::path& path,
                          const std::string& meta_json) const {
  nn::NamedTensors bundle;
  bundle.kind = "speaker-encoder";
  bundle.arch_json = cfg_.to_json();
  bundle.meta_json = meta_json.empty() ? "{}" : meta_json;
  nn::pack_params(params_, "", bundle);
  nn::save_named_tensors(path, bundle);
}

SpeakerEncoder SpeakerEncoder::load(const std::filesystem::path& path) {
  nn::NamedTensors bundle = nn::load_named_tensors(path);
  ZSVC_CHECK(bundle.kind == "speaker-encoder", ConfigError,
             "checkpoint kind mismatch (wanted speaker-encoder): " + path.string());
  SpeakerEncoder enc(EncoderConfig::from_json(bundle.arch_json), /*seed=*/0);
  nn::unpack_params(enc.params_, "", bundle);
  return enc;
}

void SpeakerEncoder::load_weights(const std::filesystem::path& path) {
  nn::NamedTensors bundle = nn::load_named_tensors(path);
  ZSVC_CHECK(bundle.kind == "speaker-encoder", ConfigError,
             "checkpoint kind mismatch (wanted speaker-encoder): " + path.string());
  const EncoderConfig stored = EncoderConfig::from_json(bundle.arch_json);
  ZSVC_CHECK(stored == cfg_, ConfigError,
             "encoder architecture mismatch in checkpoint: " + path.string());
  nn::unpack_params(params_, "", bundle);
}

}  // namespace zsvc::speaker
