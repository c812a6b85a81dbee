// zsvc/gan/discriminator.cpp

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

#include "zsvc/gan/discriminator.h"

#include <nlohmann/json.hpp>

#include "zsvc/nn/serialize.h"

namespace zsvc::gan {

void DiscriminatorConfig::validate() const {
  ZSVC_CHECK(mel_bins >= 8 && mel_bins % 4 == 0, ConfigError,
             "discriminator mel_bins must be a multiple of 4 and >= 8");
  ZSVC_CHECK(crop_frames >= 8, ConfigError, "discriminator crop must be >= 8 frames");
  ZSVC_CHECK(base_channels >= 1 && embed_dim >= 1 && proj_hidden >= 1, ConfigError,
             "bad discriminator configuration");
}

std::string DiscriminatorConfig::to_json() const {
  nlohmann::json j;
  j["mel_bins"] = mel_bins;
  j["crop_frames"] = crop_frames;
  j["base_channels"] = base_channels;
  j["embed_dim"] = embed_dim;
  j["proj_hidden"] = proj_hidden;
  return j.dump();
}

DiscriminatorConfig DiscriminatorConfig::from_json(const std::string& json) {
  nlohmann::json j = nlohmann::json::parse(json);
  DiscriminatorConfig cfg;
  cfg.mel_bins = j.at("mel_bins").get<int>();
  cfg.crop_frames = j.at("crop_frames").get<int>();
  cfg.base_channels = j.at("base_channels").get<int>();
  cfg.embed_dim = j.at("embed_dim").get<int>();
  cfg.proj_hidden = j.at("proj_hidden").get<int>();
  return cfg;
}

Discriminator::Discriminator(DiscriminatorConfig cfg, uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(derive_seed(seed, "discriminator-init"));
  const int b = cfg_.base_channels;
  entry_ = nn::Conv2d::create(params_, "entry", 1, 2 * b, 3, 9, 1, 1, 1, 4, rng);
  down1_ = nn::Conv2d::create(params_, "down1", b, 4 * b, 4, 8, 2, 2, 1, 3, rng);
  down2_ = nn::Conv2d::create(params_, "down2", 2 * b, 8 * b, 4, 8, 2, 2, 1, 3, rng);
  down3_ = nn::Conv2d::create(params_, "down3", 4 * b, 8 * b, 4, 8, 2, 2, 1, 3, rng);
  post_ = nn::Conv2d::create(params_, "post", 4 * b, 8 * b, 1, 5, 1, 1, 0, 2, rng);
  base_head_ = nn::Linear::create(params_, "base_head", 4 * b, 1, rng);
  proj1_ = nn::Linear::create(params_, "proj1", 2 * cfg_.embed_dim, cfg_.proj_hidden, rng);
  proj2_ = nn::Linear::create(params_, "proj2", cfg_.proj_hidden, cfg_.proj_hidden, rng);
  proj3_ = nn::Linear::create(params_, "proj3", cfg_.proj_hidden, 4 * b, rng);
}

nn::Var Discriminator::features(const nn::Var& x) const {
  nn::Var h = nn::glu0(entry_.forward(x));
  h = nn::glu0(down1_.forward(h));
  h = nn::glu0(down2_.forward(h));
  h = nn::glu0(down3_.forward(h));
  return nn::glu0(post_.forward(h));
}

nn::Var Discriminator::global_sum_pool(const nn::Var& feature_map) {
  const auto& shape = feature_map.value().shape();
  ZSVC_CHECK(shape.size() >= 2, ConfigError, "pooling expects {C, ...}");
  const nn::Index c = shape[0];
  const nn::Index inner = feature_map.value().size() / c;
  nn::Var flat = nn::reshape(feature_map, {c, inner});
  return nn::matmul(flat, nn::Var::constant(nn::Tensor::full({inner}, 1.0)));
}

nn::Var Discriminator::forward(const nn::Var& x, const nn::Var& source_embed,
                               const nn::Var& target_embed,
                               const nn::Tensor* input_dropout_mask) const {
  const auto& shape = x.value().shape();
  ZSVC_CHECK(shape.size() == 3 && shape[0] == 1 && shape[1] == cfg_.mel_bins &&
                 shape[2] == cfg_.crop_frames,
             DataError,
             "discriminator input must be {1, " + std::to_string(cfg_.mel_bins) +
                 ", " + std::to_string(cfg_.crop_frames) + "}; no padding inside");
  ZSVC_CHECK(source_embed.size() == cfg_.embed_dim &&
                 target_embed.size() == cfg_.embed_dim,
             ConfigError, "embedding dimension does not match discriminator config");

  nn::Var h = x;
  if (input_dropout_mask != nullptr) h = nn::apply_mask(h, *input_dropout_mask);
  nn::Var pooled = global_sum_pool(features(h));
  nn::Var cond = nn::concat0({source_embed, target_embed});
  nn::Var proj = proj3_.forward(nn::selu(proj2_.forward(nn::selu(proj1_.forward(cond)))));
  return nn::add(base_head_.forward(pooled), nn::dot(proj, pooled));
}

double Discriminator::discriminate(const audio::FrameMatrix& crop,
                                   const ConditioningPair& pair,
                                   bool dropout_active, double dropout_prob,
                                   Rng* rng) const {
  ZSVC_CHECK(crop.rows() == cfg_.crop_frames && crop.cols() == cfg_.mel_bins,
             DataError, "discriminator crop has the wrong shape");
  nn::NoGradGuard no_grad;
  nn::Tensor x = frames_to_input(crop);
  nn::Tensor mask;
  if (dropout_active) {
    ZSVC_CHECK(rng != nullptr, ConfigError, "input dropout needs an rng");
    mask = nn::dropout_mask(x.shape(), dropout_prob, *rng);
  }
  nn::Var out = forward(nn::Var::constant(std::move(x)),
                        nn::Var::constant(embedding_to_tensor(pair.source)),
                        nn::Var::constant(embedding_to_tensor(pair.target)),
                        dropout_active ? &mask : nullptr);
  return out.scalar_value();
}

void Discriminator::save(const std::filesystem::path& path,
                         const std::string& meta_json) const {
  nn::NamedTensors bundle;
  bundle.kind = "discriminator";
  bundle.arch_json = cfg_.to_json();
  bundle.meta_json = meta_json.empty() ? "{}" : meta_json;
  nn::pack_params(params_, "", bundle);
  nn::save_named_tensors(path, bundle);
}

Discriminator Discriminator::load(const std::filesystem::path& path) {
  nn::NamedTensors bundle = nn::load_named_tensors(path);
  ZSVC_CHECK(bundle.kind == "discriminator", ConfigError,
             "checkpoint kind mismatch (wanted discriminator): " + path.string());
  Discriminator d(DiscriminatorConfig::from_json(bundle.arch_json), /*seed=*/0);
  nn::unpack_params(d.params_, "", bundle);
  return d;
}

void Discriminator::load_weights(const std::filesystem::path& path) {
  nn::NamedTensors bundle = nn::load_named_tensors(path);
  ZSVC_CHECK(bundle.kind == "discriminator", ConfigError,
             "checkpoint kind mismatch (wanted discriminator): " + path.string());
  const DiscriminatorConfig stored = DiscriminatorConfig::from_json(bundle.arch_json);
  ZSVC_CHECK(stored == cfg_, ConfigError,
             "discriminator architecture mismatch in checkpoint: " + path.string());
  nn::unpack_params(params_, "", bundle);
}

}  // namespace zsvc::gan
