// zsvc/gan/generator.cpp

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

#include "zsvc/gan/generator.h"

#include <nlohmann/json.hpp>

#include "zsvc/nn/serialize.h"

namespace zsvc::gan {

void GeneratorConfig::validate() const {
  ZSVC_CHECK(mel_bins >= 4 && mel_bins % 4 == 0, ConfigError,
             "generator mel_bins must be a positive multiple of 4");
  ZSVC_CHECK(base_channels >= 1 && block_channels >= 1 && num_blocks >= 1 &&
                 embed_dim >= 1,
             ConfigError, "bad generator configuration");
}

std::string GeneratorConfig::to_json() const {
  nlohmann::json j;
  j["mel_bins"] = mel_bins;
  j["base_channels"] = base_channels;
  j["block_channels"] = block_channels;
  j["num_blocks"] = num_blocks;
  j["embed_dim"] = embed_dim;
  return j.dump();
}

GeneratorConfig GeneratorConfig::from_json(const std::string& json) {
  nlohmann::json j = nlohmann::json::parse(json);
  GeneratorConfig cfg;
  cfg.mel_bins = j.at("mel_bins").get<int>();
  cfg.base_channels = j.at("base_channels").get<int>();
  cfg.block_channels = j.at("block_channels").get<int>();
  cfg.num_blocks = j.at("num_blocks").get<int>();
  cfg.embed_dim = j.at("embed_dim").get<int>();
  return cfg;
}

Generator::Generator(GeneratorConfig cfg, uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(derive_seed(seed, "generator-init"));
  const int b = cfg_.base_channels;
  const int freq_core = cfg_.mel_bins / 4;
  const int core = cfg_.block_channels;

  entry_ = nn::Conv2d::create(params_, "entry", 1, 2 * b, 3, 9, 1, 1, 1, 4, rng);
  down1_ = nn::Conv2d::create(params_, "down1", b, 4 * b, 4, 8, 2, 2, 1, 3, rng);
  down2_ = nn::Conv2d::create(params_, "down2", 2 * b, 8 * b, 4, 8, 2, 2, 1, 3, rng);
  to_core_ = nn::Conv1d::create(params_, "to_core", 4 * b * freq_core, core, 1, 1, 0, rng);
  for (int i = 0; i < cfg_.num_blocks; ++i) {
    const std::string name = "block" + std::to_string(i);
    Block blk;
    blk.conv = nn::Conv1d::create(params_, name + ".conv", core, 2 * core, 5, 1, 2, rng);
    blk.scale = nn::Linear::create(params_, name + ".scale", 2 * cfg_.embed_dim,
                                   2 * core, rng);
    blk.shift = nn::Linear::create(params_, name + ".shift", 2 * cfg_.embed_dim,
                                   2 * core, rng);
    // Start near identity modulation: scale around 1, shift around 0.
    blk.scale.bias.node()->value.fill(1.0);
    blk.shift.bias.node()->value.set_zero();
    blocks_.push_back(std::move(blk));
  }
  from_core_ = nn::Conv1d::create(params_, "from_core", core, 4 * b * freq_core, 1, 1, 0, rng);
  up1_ = nn::Conv2d::create(params_, "up1", 4 * b, 16 * b, 3, 3, 1, 1, 1, 1, rng);
  up2_ = nn::Conv2d::create(params_, "up2", 2 * b, 8 * b, 3, 3, 1, 1, 1, 1, rng);
  out_ = nn::Conv2d::create(params_, "out", b, 1, 7, 7, 1, 1, 3, 3, rng);
}

nn::Var Generator::conditional_block(int index, const nn::Var& x,
                                     const nn::Var& cond) const {
  ZSVC_CHECK(index >= 0 && index < static_cast<int>(blocks_.size()), ConfigError,
             "conditional block index out of range");
  ZSVC_CHECK(x.value().rank() == 2 && x.value().dim(0) == cfg_.block_channels,
             ConfigError, "conditional block input channel mismatch");
  const Block& blk = blocks_[static_cast<size_t>(index)];
  nn::Var h = blk.conv.forward(x);
  nn::Var gamma = blk.scale.forward(cond);
  nn::Var beta = blk.shift.forward(cond);
  return nn::glu0(nn::conditional_instance_norm(h, gamma, beta));
}

nn::Var Generator::forward(const nn::Var& x, const nn::Var& source_embed,
                           const nn::Var& target_embed) const {
  const auto& shape = x.value().shape();
  ZSVC_CHECK(shape.size() == 3 && shape[0] == 1 && shape[1] == cfg_.mel_bins,
             ConfigError, "generator input must be {1, mel_bins, T}");
  const nn::Index t = shape[2];
  ZSVC_CHECK(t >= 4 && t % 4 == 0, ConfigError,
             "generator input length must be a positive multiple of 4 "
             "(pad_frames_to_multiple provides the padding)");
  ZSVC_CHECK(source_embed.size() == cfg_.embed_dim &&
                 target_embed.size() == cfg_.embed_dim,
             ConfigError, "embedding dimension does not match generator config");

  const int b = cfg_.base_channels;
  const int freq_core = cfg_.mel_bins / 4;
  nn::Var cond = nn::concat0({source_embed, target_embed});

  nn::Var h = nn::glu0(entry_.forward(x));
  h = nn::glu0(down1_.forward(h));
  h = nn::glu0(down2_.forward(h));
  h = nn::reshape(h, {static_cast<nn::Index>(4 * b * freq_core), t / 4});
  h = to_core_.forward(h);
  for (int i = 0; i < cfg_.num_blocks; ++i) h = conditional_block(i, h, cond);
  h = from_core_.forward(h);
  h = nn::reshape(h, {static_cast<nn::Index>(4 * b), freq_core, t / 4});
  h = nn::glu0(nn::pixel_shuffle_2d(up1_.forward(h), 2));
  h = nn::glu0(nn::pixel_shuffle_2d(up2_.forward(h), 2));
  return out_.forward(h);
}

audio::FrameMatrix Generator::generate(const audio::FrameMatrix& mel,
                                       const ConditioningPair& pair) const {
  ZSVC_CHECK(mel.allFinite(), DataError, "non-finite values in generator input");
  ZSVC_CHECK(pair.source.allFinite() && pair.target.allFinite(), DataError,
             "non-finite values in conditioning embeddings");
  nn::NoGradGuard no_grad;
  nn::Var out = forward(nn::Var::constant(frames_to_input(mel)),
                        nn::Var::constant(embedding_to_tensor(pair.source)),
                        nn::Var::constant(embedding_to_tensor(pair.target)));
  return input_to_frames(out.value());
}

audio::FrameMatrix Generator::generate_padded(const audio::FrameMatrix& mel,
                                              const ConditioningPair& pair) const {
  const int64_t t = mel.rows();
  return audio::trim_frames(generate(audio::pad_frames_to_multiple(mel, 4), pair), t);
}

void Generator::save(const std::filesystem::path& path,
                     const std::string& meta_json) const {
  nn::NamedTensors bundle;
  bundle.kind = "generator";
  bundle.arch_json = cfg_.to_json();
  bundle.meta_json = meta_json.empty() ? "{}" : meta_json;
  nn::pack_params(params_, "", bundle);
  nn::save_named_tensors(path, bundle);
}

Generator Generator::load(const std::filesystem::path& path) {
  nn::NamedTensors bundle = nn::load_named_tensors(path);
  ZSVC_CHECK(bundle.kind == "generator", ConfigError,
             "checkpoint kind mismatch (wanted generator): " + path.string());
  Generator g(GeneratorConfig::from_json(bundle.arch_json), /*seed=*/0);
  nn::unpack_params(g.params_, "", bundle);
  return g;
}

void Generator::load_weights(const std::filesystem::path& path) {
  nn::NamedTensors bundle = nn::load_named_tensors(path);
  ZSVC_CHECK(bundle.kind == "generator", ConfigError,
             "checkpoint kind mismatch (wanted generator): " + path.string());
  const GeneratorConfig stored = GeneratorConfig::from_json(bundle.arch_json);
  ZSVC_CHECK(stored == cfg_, ConfigError,
             "generator architecture mismatch in checkpoint: " + path.string());
  nn::unpack_params(params_, "", bundle);
}

nn::Tensor frames_to_input(const audio::FrameMatrix& mel) {
  const nn::Index t = mel.rows(), bins = mel.cols();
  nn::Tensor x({1, bins, t});
  for (nn::Index f = 0; f < bins; ++f)
    for (nn::Index i = 0; i < t; ++i) x[f * t + i] = mel(i, f);
  return x;
}

audio::FrameMatrix input_to_frames(const nn::Tensor& x) {
  ZSVC_CHECK(x.rank() == 3 && x.dim(0) == 1, ConfigError,
             "expected a {1, bins, T} tensor");
  const nn::Index bins = x.dim(1), t = x.dim(2);
  audio::FrameMatrix mel(t, bins);
  for (nn::Index f = 0; f < bins; ++f)
    for (nn::Index i = 0; i < t; ++i) mel(i, f) = x[f * t + i];
  return mel;
}

nn::Tensor embedding_to_tensor(const Eigen::VectorXd& v) {
  nn::Tensor t({static_cast<nn::Index>(v.size())});
  std::copy(v.data(), v.data() + v.size(), t.data());
  return t;
}

}  // namespace zsvc::gan
