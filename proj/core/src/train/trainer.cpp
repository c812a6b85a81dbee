// zsvc/train/trainer.cpp

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

#include "zsvc/train/trainer.h"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "zsvc/nn/serialize.h"

namespace zsvc::train {

std::string StepRecord::to_json() const {
  nlohmann::json j;
  j["step"] = step;
  j["epoch"] = epoch;
  j["identity_loss"] = identity_loss;
  j["cycle_loss"] = cycle_loss;
  j["g_adv_loss"] = g_adv_loss;
  j["d_adv_loss"] = d_adv_loss;
  j["total_g_loss"] = total_g_loss;
  j["identity_weight"] = identity_weight;
  j["g_lr"] = g_lr;
  j["d_lr"] = d_lr;
  j["g_grad_norm_preclip"] = g_grad_norm_preclip;
  j["g_grad_norm"] = g_grad_norm;
  j["d_grad_norm_preclip"] = d_grad_norm_preclip;
  j["d_grad_norm"] = d_grad_norm;
  j["d_steps"] = d_steps;
  j["crop_frames"] = crop_frames;
  j["dropout_active"] = dropout_active;
  return j.dump();
}

namespace {

// Training samples one conversion direction per batch item.
struct PairSample {
  const audio::FrameMatrix* utterance;
  const Eigen::VectorXd* source_embed;
  const Eigen::VectorXd* target_embed;
};

}  // namespace

GanTrainer::GanTrainer(const gan::GeneratorConfig& gen_cfg,
                       const gan::DiscriminatorConfig& disc_cfg,
                       TrainingConfig cfg, GanDataset dataset)
    : gen_cfg_(gen_cfg),
      disc_cfg_(disc_cfg),
      cfg_(std::move(cfg)),
      dataset_(std::make_shared<const GanDataset>(std::move(dataset))),
      opt_g_(cfg_.adam_beta1, cfg_.adam_beta2),
      opt_d_(cfg_.adam_beta1, cfg_.adam_beta2),
      rng_(derive_seed(cfg_.seed, "gan-training")) {
  cfg_.validate();
  gen_cfg_.validate();
  disc_cfg_.validate();
  ZSVC_CHECK(disc_cfg_.crop_frames == cfg_.fixed_crop_frames, ConfigError,
             "critic crop length must equal the training fixed crop");
  ZSVC_CHECK(dataset_->speakers.size() >= 2, DataError,
             "adversarial training needs at least 2 speakers");
  for (const auto& spk : dataset_->speakers) {
    ZSVC_CHECK(!spk.utterances.empty(), DataError,
               "speaker '" + spk.id + "' has no utterances");
    ZSVC_CHECK(spk.embedding.size() == gen_cfg_.embed_dim, ConfigError,
               "speaker '" + spk.id + "' embedding does not match the model");
    for (const auto& u : spk.utterances)
      ZSVC_CHECK(u.cols() == gen_cfg_.mel_bins && u.rows() >= 1, DataError,
                 "bad utterance shape for speaker '" + spk.id + "'");
  }

  generator_ = std::make_unique<gan::Generator>(gen_cfg_, derive_seed(cfg_.seed, "gen"));
  discriminator_ =
      std::make_unique<gan::Discriminator>(disc_cfg_, derive_seed(cfg_.seed, "disc"));
  g_lr_ = cfg_.g_lr;
  steps_per_epoch_ =
      cfg_.steps_per_epoch > 0
          ? cfg_.steps_per_epoch
          : std::max<int64_t>(1, dataset_->total_utterances() / cfg_.batch_size);
}

GanTrainer::GanTrainer(const GanTrainer& other)
    : gen_cfg_(other.gen_cfg_),
      disc_cfg_(other.disc_cfg_),
      cfg_(other.cfg_),
      dataset_(other.dataset_),
      opt_g_(cfg_.adam_beta1, cfg_.adam_beta2),
      opt_d_(cfg_.adam_beta1, cfg_.adam_beta2),
      rng_(0),
      step_(other.step_),
      steps_per_epoch_(other.steps_per_epoch_),
      d_steps_per_g_(other.d_steps_per_g_),
      g_lr_(other.g_lr_),
      last_balance_epoch_(other.last_balance_epoch_),
      last_probe_epoch_(other.last_probe_epoch_),
      window_g_adv_(other.window_g_adv_),
      window_d_adv_(other.window_d_adv_) {
  generator_ = std::make_unique<gan::Generator>(gen_cfg_, 0);
  discriminator_ = std::make_unique<gan::Discriminator>(disc_cfg_, 0);
  generator_->params().copy_values_from(other.generator_->params());
  discriminator_->params().copy_values_from(other.discriminator_->params());
  opt_g_.restore(other.opt_g_.snapshot(), generator_->params());
  opt_d_.restore(other.opt_d_.snapshot(), discriminator_->params());
  rng_.engine() = other.rng_.engine();
}

double GanTrainer::current_identity_weight() const {
  if (cfg_.identity_decay_steps <= 0) return cfg_.identity_weight;
  const double frac = std::min(1.0, static_cast<double>(step_) /
                                        static_cast<double>(cfg_.identity_decay_steps));
  return cfg_.identity_weight +
         (cfg_.identity_weight_final - cfg_.identity_weight) * frac;
}

void GanTrainer::set_log_path(const std::filesystem::path& path) {
  log_file_.emplace(path, std::ios::app);
  ZSVC_CHECK(log_file_->good(), DataError, "cannot open training log: " + path.string());
}

void GanTrainer::snapshot_last_good() {
  auto bundle = std::make_unique<nn::NamedTensors>();
  bundle->kind = "gan-training-state";
  nlohmann::json arch;
  arch["generator"] = nlohmann::json::parse(gen_cfg_.to_json());
  arch["discriminator"] = nlohmann::json::parse(disc_cfg_.to_json());
  bundle->arch_json = arch.dump();
  nlohmann::json meta;
  meta["step"] = step_;
  meta["epoch"] = epoch();
  meta["reason"] = "last-known-good snapshot";
  bundle->meta_json = meta.dump();
  nn::pack_params(generator_->params(), "g.", *bundle);
  nn::pack_params(discriminator_->params(), "d.", *bundle);
  last_good_ = std::move(bundle);
}

void GanTrainer::abort_diverged(const std::string& what) {
  if (abort_dump_path_ && last_good_) {
    try {
      nn::save_named_tensors(*abort_dump_path_, *last_good_);
    } catch (const Error&) {
      // The dump is best-effort diagnostics; the divergence error wins.
    }
  }
  throw DivergenceError(what + " at step " + std::to_string(step_) +
                        (abort_dump_path_ && last_good_
                             ? "; last-known-good state dumped to " +
                                   abort_dump_path_->string()
                             : ""));
}

void GanTrainer::step_once() {
  if (cfg_.abort_snapshot_interval_steps > 0 &&
      step_ % cfg_.abort_snapshot_interval_steps == 0) {
    snapshot_last_good();
  }

  const bool dropout_now = dropout_active();
  const double id_weight = current_identity_weight();
  const double d_lr = cfg_.disc_lr_ratio * g_lr_;
  const int num_speakers = static_cast<int>(dataset_->speakers.size());

  auto sample_pair = [&]() {
    const auto src = static_cast<size_t>(rng_.randint(0, num_speakers - 1));
    size_t trg = static_cast<size_t>(rng_.randint(0, num_speakers - 2));
    if (trg >= src) ++trg;
    const auto& s = dataset_->speakers[src];
    const auto& utt =
        s.utterances[static_cast<size_t>(rng_.randint(0, static_cast<int64_t>(s.utterances.size()) - 1))];
    return PairSample{&utt, &s.embedding, &dataset_->speakers[trg].embedding};
  };

  StepRecord rec;
  rec.step = step_;
  rec.epoch = epoch();
  rec.identity_weight = id_weight;
  rec.g_lr = g_lr_;
  rec.d_lr = d_lr;
  rec.d_steps = d_steps_per_g_;
  rec.crop_frames = cfg_.fixed_crop_frames;
  rec.dropout_active = dropout_now;

  // --- generator update ---
  generator_->params().zero_grad();
  discriminator_->params().zero_grad();
  nn::Var total = nn::Var::constant(nn::Tensor::scalar(0.0));
  double id_acc = 0.0, cyc_acc = 0.0, adv_acc = 0.0;
  for (int bi = 0; bi < cfg_.batch_size; ++bi) {
    const PairSample sample = sample_pair();
    const audio::FrameMatrix crop =
        sample_training_crop(*sample.utterance, CropMode::kFixed, cfg_, rng_);
    nn::Var x = nn::Var::constant(gan::frames_to_input(crop));
    nn::Var s_src = nn::Var::constant(gan::embedding_to_tensor(*sample.source_embed));
    nn::Var s_trg = nn::Var::constant(gan::embedding_to_tensor(*sample.target_embed));

    nn::Var same = generator_->forward(x, s_src, s_src);
    nn::Var id_term = nn::norm2(nn::sub(same, x));

    nn::Var converted = generator_->forward(x, s_src, s_trg);
    nn::Var back = generator_->forward(converted, s_trg, s_src);
    nn::Var cyc_term = nn::square(nn::sum_abs(nn::sub(x, back)));

    nn::Tensor mask;
    const nn::Tensor* mask_ptr = nullptr;
    if (dropout_now) {
      mask = nn::dropout_mask(x.value().shape(), cfg_.dropout_prob, rng_);
      mask_ptr = &mask;
    }
    nn::Var critic = discriminator_->forward(converted, s_src, s_trg, mask_ptr);
    nn::Var adv_term = nn::square(nn::add_scalar(critic, -cfg_.real_target));

    id_acc += id_term.scalar_value();
    cyc_acc += cyc_term.scalar_value();
    adv_acc += adv_term.scalar_value();
    nn::Var item = nn::add(
        nn::add(nn::mul_scalar(id_term, id_weight), nn::mul_scalar(cyc_term, cfg_.cycle_weight)),
        adv_term);
    total = nn::add(total, item);
  }
  total = nn::mul_scalar(total, 1.0 / cfg_.batch_size);
  rec.identity_loss = id_acc / cfg_.batch_size;
  rec.cycle_loss = cyc_acc / cfg_.batch_size;
  rec.g_adv_loss = adv_acc / cfg_.batch_size;
  rec.total_g_loss = total.scalar_value();
  if (!std::isfinite(rec.total_g_loss)) abort_diverged("non-finite generator loss");

  nn::backward(total);
  rec.g_grad_norm_preclip = nn::clip_grad_norm(generator_->params(), cfg_.clip_norm);
  rec.g_grad_norm = nn::grad_norm(generator_->params());
  opt_g_.step(generator_->params(), g_lr_);

  // --- critic updates ---
  double d_loss_acc = 0.0;
  double d_pre = 0.0, d_post = 0.0;
  for (int ds = 0; ds < d_steps_per_g_; ++ds) {
    discriminator_->params().zero_grad();
    nn::Var d_total = nn::Var::constant(nn::Tensor::scalar(0.0));
    for (int bi = 0; bi < cfg_.batch_size; ++bi) {
      const PairSample sample = sample_pair();
      const audio::FrameMatrix crop =
          sample_training_crop(*sample.utterance, CropMode::kFixed, cfg_, rng_);
      // The generator only feeds the critic here; no gradient flows back.
      audio::FrameMatrix fake;
      {
        nn::NoGradGuard no_grad;
        fake = generator_->generate(
            crop, gan::ConditioningPair{*sample.source_embed, *sample.target_embed});
      }
      nn::Var s_src = nn::Var::constant(gan::embedding_to_tensor(*sample.source_embed));
      nn::Var s_trg = nn::Var::constant(gan::embedding_to_tensor(*sample.target_embed));

      nn::Tensor fake_mask, real_mask;
      const nn::Tensor *fake_mask_ptr = nullptr, *real_mask_ptr = nullptr;
      if (dropout_now) {
        fake_mask = nn::dropout_mask({1, gen_cfg_.mel_bins, cfg_.fixed_crop_frames},
                                     cfg_.dropout_prob, rng_);
        real_mask = nn::dropout_mask({1, gen_cfg_.mel_bins, cfg_.fixed_crop_frames},
                                     cfg_.dropout_prob, rng_);
        fake_mask_ptr = &fake_mask;
        real_mask_ptr = &real_mask;
      }
      nn::Var fake_score = discriminator_->forward(
          nn::Var::constant(gan::frames_to_input(fake)), s_src, s_trg, fake_mask_ptr);
      // Real term with the embedding order swapped: the source utterance is
      // genuine speech of the reverse pairing's target.
      nn::Var real_score = discriminator_->forward(
          nn::Var::constant(gan::frames_to_input(crop)), s_trg, s_src, real_mask_ptr);
      nn::Var item =
          nn::add(nn::square(nn::add_scalar(fake_score, -cfg_.fake_target)),
                  nn::square(nn::add_scalar(real_score, -cfg_.real_target)));
      d_total = nn::add(d_total, item);
    }
    d_total = nn::mul_scalar(d_total, 1.0 / cfg_.batch_size);
    const double d_loss = d_total.scalar_value();
    if (!std::isfinite(d_loss)) abort_diverged("non-finite critic loss");
    d_loss_acc += d_loss;
    nn::backward(d_total);
    d_pre = nn::clip_grad_norm(discriminator_->params(), cfg_.clip_norm);
    d_post = nn::grad_norm(discriminator_->params());
    opt_d_.step(discriminator_->params(), d_lr);
  }
  rec.d_adv_loss = d_loss_acc / d_steps_per_g_;
  rec.d_grad_norm_preclip = d_pre;
  rec.d_grad_norm = d_post;

  window_g_adv_.push_back(rec.g_adv_loss);
  window_d_adv_.push_back(rec.d_adv_loss);

  log_.push_back(rec);
  if (log_file_) *log_file_ << rec.to_json() << "\n";

  ++step_;
  maybe_rebalance();
}

void GanTrainer::maybe_rebalance() {
  if (cfg_.balance_interval_epochs <= 0) return;
  const int64_t e = epoch();
  if (e < last_balance_epoch_ + cfg_.balance_interval_epochs) return;
  if (window_g_adv_.empty()) return;
  double g_mean = 0.0, d_mean = 0.0;
  for (double v : window_g_adv_) g_mean += v;
  for (double v : window_d_adv_) d_mean += v;
  g_mean /= static_cast<double>(window_g_adv_.size());
  d_mean /= static_cast<double>(window_d_adv_.size());
  if (g_mean > 1e-12) {
    // Aim for d_mean ~ g_mean / balance_target.
    const double ratio = d_mean / g_mean;
    if (ratio > cfg_.balance_ratio_high && d_steps_per_g_ < cfg_.d_steps_max)
      ++d_steps_per_g_;
    else if (ratio < cfg_.balance_ratio_low && d_steps_per_g_ > cfg_.d_steps_min)
      --d_steps_per_g_;
  }
  window_g_adv_.clear();
  window_d_adv_.clear();
  last_balance_epoch_ = e;
}

void GanTrainer::maybe_reprobe() {
  if (cfg_.lr_grid.empty()) return;
  const int64_t e = epoch();
  const bool first = (step_ == 0);
  const bool periodic = cfg_.lr_probe_interval_epochs > 0 &&
                        e >= last_probe_epoch_ + cfg_.lr_probe_interval_epochs;
  if (!first && !periodic) return;

  struct Client : ProbeClient {
    const GanTrainer* base;
    std::unique_ptr<GanTrainer> live;
    explicit Client(const GanTrainer* t) : base(t) {}
    std::unique_ptr<ProbeClient> clone() const override {
      auto c = std::make_unique<Client>(base);
      c->live.reset(new GanTrainer(*base));
      return c;
    }
    double step(double lr) override {
      ZSVC_CHECK(live != nullptr, ConfigError, "probe ran on an unclosed client");
      live->g_lr_ = lr;
      live->step_once();
      return live->log_.back().total_g_loss;
    }
  };

  Client client(this);
  g_lr_ = lr_range_probe(client, cfg_.lr_grid, cfg_.lr_probe_steps);
  last_probe_epoch_ = e;
}

void GanTrainer::run_steps(int64_t n) {
  for (int64_t i = 0; i < n; ++i) step_once();
}

void GanTrainer::run() {
  const int64_t total = cfg_.epochs * steps_per_epoch_;
  while (step_ < total) {
    maybe_reprobe();
    step_once();
  }
}

void GanTrainer::save_checkpoint(const std::filesystem::path& path,
                                 const std::string& extra_meta_json) const {
  nn::NamedTensors bundle;
  bundle.kind = "gan-training-state";
  nlohmann::json arch;
  arch["generator"] = nlohmann::json::parse(gen_cfg_.to_json());
  arch["discriminator"] = nlohmann::json::parse(disc_cfg_.to_json());
  arch["training"] = nlohmann::json::parse(cfg_.to_json());
  bundle.arch_json = arch.dump();

  nlohmann::json meta = extra_meta_json.empty()
                            ? nlohmann::json::object()
                            : nlohmann::json::parse(extra_meta_json);
  meta["step"] = step_;
  meta["d_steps_per_g"] = d_steps_per_g_;
  meta["g_lr"] = g_lr_;
  meta["last_balance_epoch"] = last_balance_epoch_;
  meta["last_probe_epoch"] = last_probe_epoch_;
  std::ostringstream rng_state;
  rng_state << rng_.engine();
  meta["rng_state"] = rng_state.str();
  meta["opt_g_t"] = opt_g_.step_count();
  meta["opt_d_t"] = opt_d_.step_count();
  bundle.meta_json = meta.dump();

  nn::pack_params(generator_->params(), "g.", bundle);
  nn::pack_params(discriminator_->params(), "d.", bundle);
  const auto pack_moments = [&bundle](const nn::Adam& opt, const nn::ParamSet& params,
                                      const std::string& prefix) {
    const nn::Adam::State s = opt.snapshot();
    for (size_t i = 0; i < s.m.size(); ++i) {
      bundle.tensors.emplace_back(prefix + ".m." + params.items()[i].first, s.m[i]);
      bundle.tensors.emplace_back(prefix + ".v." + params.items()[i].first, s.v[i]);
    }
  };
  pack_moments(opt_g_, generator_->params(), "adam_g");
  pack_moments(opt_d_, discriminator_->params(), "adam_d");
  nn::save_named_tensors(path, bundle);
}

GanTrainer GanTrainer::resume(const std::filesystem::path& path, GanDataset dataset) {
  nn::NamedTensors bundle = nn::load_named_tensors(path);
  ZSVC_CHECK(bundle.kind == "gan-training-state", ConfigError,
             "checkpoint kind mismatch (wanted gan-training-state): " + path.string());
  nlohmann::json arch = nlohmann::json::parse(bundle.arch_json);
  GanTrainer trainer(gan::GeneratorConfig::from_json(arch.at("generator").dump()),
                     gan::DiscriminatorConfig::from_json(arch.at("discriminator").dump()),
                     TrainingConfig::from_json(arch.at("training").dump()),
                     std::move(dataset));
  nn::unpack_params(trainer.generator_->params(), "g.", bundle);
  nn::unpack_params(trainer.discriminator_->params(), "d.", bundle);

  nlohmann::json meta = nlohmann::json::parse(bundle.meta_json);
  trainer.step_ = meta.at("step").get<int64_t>();
  trainer.d_steps_per_g_ = meta.at("d_steps_per_g").get<int>();
  trainer.g_lr_ = meta.at("g_lr").get<double>();
  trainer.last_balance_epoch_ = meta.at("last_balance_epoch").get<int64_t>();
  trainer.last_probe_epoch_ = meta.at("last_probe_epoch").get<int64_t>();
  std::istringstream rng_state(meta.at("rng_state").get<std::string>());
  rng_state >> trainer.rng_.engine();

  const auto restore_moments = [&bundle](nn::Adam& opt, const nn::ParamSet& params,
                                         const std::string& prefix, int64_t t) {
    nn::Adam::State s;
    s.t = t;
    for (const auto& [name, v] : params.items()) {
      s.m.push_back(bundle.find(prefix + ".m." + name));
      s.v.push_back(bundle.find(prefix + ".v." + name));
    }
    opt.restore(s, params);
  };
  restore_moments(trainer.opt_g_, trainer.generator_->params(), "adam_g",
                  meta.at("opt_g_t").get<int64_t>());
  restore_moments(trainer.opt_d_, trainer.discriminator_->params(), "adam_d",
                  meta.at("opt_d_t").get<int64_t>());
  return trainer;
}

}  // namespace zsvc::train
