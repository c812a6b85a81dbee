// tests/acceptance/acceptance_main.cpp

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

// End-to-end acceptance suite. Each criterion prints one [PASS]/[FAIL] line;
// the process exits nonzero if any checked criterion fails.
//
//   acceptance                 runs all criteria
//   acceptance --criterion N   runs criterion N only

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "testutil/gradcheck.h"
#include "testutil/synth.h"
#include "zsvc/cli/commands.h"
#include "zsvc/speaker/ge2e.h"
#include "zsvc/train/losses.h"

using namespace zsvc;
using audio::FrameMatrix;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << "  FAILED: " << what << "\n";
    }
  }
  template <typename T>
  void expect_le(T value, T bound, const std::string& what) {
    if (!(value <= bound)) {
      ok = false;
      detail << "  FAILED: " << what << " (" << value << " > " << bound << ")\n";
    }
  }
};

Eigen::VectorXd unit_vec(int dim, uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.normal();
  v.normalize();
  return v;
}

// ---------------------------------------------------------------------------
// 1. Conditional-instance-norm statistics: over 1000 random non-constant
//    channels the output mean equals beta and the population std equals
//    |gamma|, both within 1e-4.
// ---------------------------------------------------------------------------
Check criterion_1() {
  Check c;
  Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto len = rng.randint(8, 128);
    nn::Tensor x({1, len});
    const double mu = rng.normal(0.0, 3.0);
    const double sigma = rng.uniform(0.2, 4.0);
    for (nn::Index i = 0; i < len; ++i) x[i] = mu + sigma * rng.normal();
    const double gamma = rng.uniform(-3.0, 3.0);
    const double beta = rng.normal(0.0, 2.0);

    nn::Var out = nn::conditional_instance_norm(
        nn::Var::constant(x), nn::Var::constant(nn::Tensor::scalar(gamma)),
        nn::Var::constant(nn::Tensor::scalar(beta)));
    const auto& y = out.value().array();
    const double out_mean = y.mean();
    const double out_std = std::sqrt((y - out_mean).square().mean());
    c.expect(std::abs(out_mean - beta) < 1e-4, "output mean == beta");
    c.expect(std::abs(out_std - std::abs(gamma)) < 1e-4, "output std == |gamma|");
    if (!c.ok) break;
  }
  return c;
}

// ---------------------------------------------------------------------------
// 2. Loss identities: an identity conversion gives exactly zero identity and
//    cycle losses; a critic at its targets gives exactly zero adversarial
//    loss; the total equals the weighted combination to machine precision.
// ---------------------------------------------------------------------------
Check criterion_2() {
  Check c;
  const auto identity = [](const FrameMatrix& x, const Eigen::VectorXd&,
                           const Eigen::VectorXd&) { return x; };
  Rng rng(202);
  FrameMatrix x(17, 80);
  for (int64_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const Eigen::VectorXd e = unit_vec(256, 1);

  c.expect(train::identity_loss(identity, x, e) == 0.0, "identity map gives L_id == 0");
  c.expect(train::cycle_loss(identity, x, e, e) == 0.0, "identity map gives L_cyc == 0");

  const auto critic_opt = [&x](const FrameMatrix& m, const Eigen::VectorXd&,
                               const Eigen::VectorXd&) {
    return (m - x).cwiseAbs().sum() < 1e-12 ? 1.0 : 0.0;
  };
  FrameMatrix fake = x.array() + 1.0;
  c.expect(train::discriminator_adv_loss(critic_opt, fake, x, e, e, 1.0, 0.0) == 0.0,
           "critic at (a, b) gives L_D == 0");

  for (int trial = 0; trial < 100; ++trial) {
    const double id = std::abs(rng.normal()), cyc = std::abs(rng.normal());
    const double adv = std::abs(rng.normal());
    const double wi = rng.uniform(0.0, 8.0), wc = rng.uniform(0.0, 12.0);
    const double expected = wi * id + wc * cyc + adv;
    c.expect(train::total_generator_loss(id, cyc, adv, wi, wc) == expected,
             "total loss equals the weighted combination bit-for-bit");
  }
  return c;
}

// ---------------------------------------------------------------------------
// 3. Gradient oracle: analytic gradients of the GE2E loss, the conditional
//    instance norm, and the total generator loss on a tiny generator
//    (2 blocks, 16 channels) match central differences within 1e-3 relative
//    error at float64, >= 20 probes each.
// ---------------------------------------------------------------------------
Check criterion_3() {
  Check c;
  Rng rng(303);

  {  // GE2E on a 2x2 batch, plus the learned scale and bias.
    std::vector<std::vector<nn::Var>> batch(2);
    std::vector<nn::Var> leaves;
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) {
        nn::Tensor t = nn::Tensor::normal({8}, 1.0, rng);
        t.array() /= std::sqrt(t.array().square().sum());
        nn::Var v = nn::Var::leaf(t, true);
        batch[static_cast<size_t>(j)].push_back(v);
        leaves.push_back(v);
      }
    nn::Var w = nn::Var::leaf(nn::Tensor::scalar(10.0), true);
    nn::Var b = nn::Var::leaf(nn::Tensor::scalar(-5.0), true);
    leaves.push_back(w);
    leaves.push_back(b);
    auto fn = [&]() { return speaker::ge2e_loss(batch, w, b); };
    const auto report = testutil::check_gradients(fn, leaves, 6, rng);
    c.expect(report.probes >= 20, "ge2e probes >= 20");
    c.expect_le(report.max_rel_err, 1e-3, "ge2e gradient relative error");
  }

  {  // Conditional instance norm.
    auto x = nn::Var::leaf(nn::Tensor::normal({3, 24}, 1.5, rng), true);
    auto g = nn::Var::leaf(nn::Tensor::normal({3}, 1.0, rng), true);
    auto b = nn::Var::leaf(nn::Tensor::normal({3}, 1.0, rng), true);
    auto probe = nn::Tensor::normal({3, 24}, 1.0, rng);
    auto fn = [&]() {
      return nn::dot(nn::conditional_instance_norm(x, g, b), nn::Var::constant(probe));
    };
    const auto report = testutil::check_gradients(fn, {x, g, b}, 10, rng);
    c.expect(report.probes >= 20, "cin probes >= 20");
    c.expect_le(report.max_rel_err, 1e-3, "cin gradient relative error");
  }

  {  // Total generator loss through a tiny generator and critic.
    gan::GeneratorConfig gcfg;
    gcfg.base_channels = 4;
    gcfg.block_channels = 16;
    gcfg.num_blocks = 2;
    gcfg.embed_dim = 16;
    gan::Generator gen(gcfg, 11);
    gan::DiscriminatorConfig dcfg;
    dcfg.base_channels = 2;
    dcfg.crop_frames = 8;
    dcfg.embed_dim = 16;
    dcfg.proj_hidden = 8;
    gan::Discriminator disc(dcfg, 12);

    nn::Var x = nn::Var::constant(nn::Tensor::normal({1, 80, 8}, 1.0, rng));
    nn::Var s = nn::Var::constant(gan::embedding_to_tensor(unit_vec(16, 2)));
    nn::Var t = nn::Var::constant(gan::embedding_to_tensor(unit_vec(16, 3)));
    auto fn = [&]() {
      nn::Var same = gen.forward(x, s, s);
      nn::Var conv = gen.forward(x, s, t);
      nn::Var back = gen.forward(conv, t, s);
      nn::Var id = nn::norm2(nn::sub(same, x));
      nn::Var cyc = nn::square(nn::sum_abs(nn::sub(x, back)));
      nn::Var adv = nn::square(nn::add_scalar(disc.forward(conv, s, t), -1.0));
      return nn::add(nn::add(nn::mul_scalar(id, 5.0), nn::mul_scalar(cyc, 10.0)), adv);
    };
    // Probe a spread of generator parameters (one coordinate per tensor
    // exceeds 20 probes by itself).
    std::vector<nn::Var> leaves;
    for (auto& [name, v] : gen.params().items()) leaves.push_back(v);
    const auto report = testutil::check_gradients(fn, leaves, 1, rng);
    c.expect(report.probes >= 20, "generator-loss probes >= 20");
    c.expect_le(report.max_rel_err, 1e-3, "total generator loss gradient relative error");
  }
  return c;
}

// ---------------------------------------------------------------------------
// 4. Warping-path oracle: on 500 random instance pairs with lengths <= 8 the
//    dynamic-programming cost equals exhaustive enumeration exactly.
// ---------------------------------------------------------------------------
double enumerate_min_cost(const FrameMatrix& a, const FrameMatrix& b, int64_t i,
                          int64_t j) {
  const double d = (a.row(i) - b.row(j)).norm();
  if (i == 0 && j == 0) return d;
  double best = std::numeric_limits<double>::infinity();
  if (i > 0 && j > 0) best = std::min(best, enumerate_min_cost(a, b, i - 1, j - 1));
  if (i > 0) best = std::min(best, enumerate_min_cost(a, b, i - 1, j));
  if (j > 0) best = std::min(best, enumerate_min_cost(a, b, i, j - 1));
  return d + best;
}

Check criterion_4() {
  Check c;
  Rng rng(404);
  for (int trial = 0; trial < 500; ++trial) {
    const auto ta = rng.randint(1, 8), tb = rng.randint(1, 8);
    FrameMatrix a(ta, 4), b(tb, 4);
    for (int64_t i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    for (int64_t i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
    const auto path = eval::dtw_align(a, b);
    c.expect(path.valid_for(ta, tb), "path satisfies the step/boundary invariants");
    c.expect(path.cost == enumerate_min_cost(a, b, ta - 1, tb - 1),
             "dp cost equals exhaustive enumeration");
    if (!c.ok) break;
  }
  return c;
}

// ---------------------------------------------------------------------------
// 5. Training-contract suite over a 300-step seeded run: post-clip gradient
//    norm <= 1 + 1e-6, critic LR always half the generator LR, dropout
//    inactive before its start epoch, fixed-mode crops == K every step, and
//    variable-mode crops are multiples of 32 in [96, 320].
// ---------------------------------------------------------------------------
Check criterion_5() {
  Check c;

  gan::GeneratorConfig gcfg;
  gcfg.base_channels = 2;
  gcfg.block_channels = 8;
  gcfg.num_blocks = 1;
  gcfg.embed_dim = 8;
  gan::DiscriminatorConfig dcfg;
  dcfg.base_channels = 2;
  dcfg.crop_frames = 32;
  dcfg.embed_dim = 8;
  dcfg.proj_hidden = 8;
  train::TrainingConfig tcfg;
  tcfg.fixed_crop_frames = 32;
  tcfg.seed = 505;
  tcfg.g_lr = 1e-3;
  tcfg.steps_per_epoch = 25;
  tcfg.epochs = 12;

  std::vector<testutil::SpeakerProfile> profiles{testutil::speaker_profile(0),
                                                 testutil::speaker_profile(4)};
  std::vector<Eigen::VectorXd> embeds{unit_vec(8, 4), unit_vec(8, 5)};
  auto dataset = testutil::make_gan_dataset(profiles, embeds, 4, 96, 41);

  train::GanTrainer trainer(gcfg, dcfg, tcfg, std::move(dataset));
  trainer.run_steps(300);
  c.expect(trainer.log().size() == 300, "300 logged steps");
  for (const auto& rec : trainer.log()) {
    c.expect_le(rec.g_grad_norm, tcfg.clip_norm + 1e-6, "generator post-clip norm");
    c.expect_le(rec.d_grad_norm, tcfg.clip_norm + 1e-6, "critic post-clip norm");
    c.expect(rec.d_lr == 0.5 * rec.g_lr, "critic LR == 0.5 x generator LR");
    c.expect(rec.crop_frames == tcfg.fixed_crop_frames, "fixed-mode crop == K");
    c.expect(!rec.dropout_active || rec.epoch >= tcfg.dropout_start_epoch,
             "dropout inactive before the start epoch");
    if (!c.ok) break;
  }

  // Variable-mode sampling: full support, nothing outside the grid.
  train::TrainingConfig vcfg;
  Rng rng(506);
  std::set<int> seen;
  for (int i = 0; i < 10000; ++i) {
    const int k = train::sample_crop_length(train::CropMode::kVariable, vcfg, rng);
    c.expect(k >= 96 && k <= 320 && k % 32 == 0, "variable crop in the grid");
    seen.insert(k);
  }
  c.expect(seen.size() == 8, "every grid value observed");
  return c;
}

// ---------------------------------------------------------------------------
// 6. Toy overfit, end to end: two synthetic speakers, ~9 minutes of frames,
//    <= 3000 steps at a fixed seed. (a) the weighted identity loss falls by
//    at least half from its step-50 value; (b) cyclic-reconstruction MAE
//    beats source-vs-target MAE; (c) the converted output sits closer to the
//    target speaker than the source does, under the toy-trained encoder.
// ---------------------------------------------------------------------------
Check criterion_6() {
  Check c;
  const uint64_t seed = 606;

  // Toy encoder first: 8 synthetic speakers so the embedding space is
  // non-trivial; 256-d output as always.
  speaker::EncoderConfig ecfg;
  ecfg.hidden = 48;
  ecfg.layers = 2;
  speaker::SpeakerEncoder encoder(ecfg, seed);
  {
    const auto enc_data = testutil::make_encoder_dataset(8, 4, 96, seed + 1);
    speaker::EncoderTrainConfig etc;
    etc.speakers_per_batch = 4;
    etc.utts_per_speaker = 3;
    etc.crop_frames = 32;
    etc.epochs = 2;
    etc.steps_per_epoch = 50;
    etc.lr_start = 2e-3;
    etc.lr_final = 5e-4;
    etc.seed = seed + 2;
    const auto stats = train_speaker_encoder(encoder, enc_data, etc);
    c.expect(stats.losses.back() < stats.losses.front(), "toy encoder learned");
  }

  // Two of the synthetic speakers, ~46.5k frames total (9 min at 86.13 fps).
  const auto profile_a = testutil::speaker_profile(0);
  const auto profile_b = testutil::speaker_profile(4);
  auto embed_of = [&](const testutil::SpeakerProfile& p, uint64_t s) {
    std::vector<audio::MelSpectrogram> mels;
    for (int u = 0; u < 4; ++u) {
      audio::MelSpectrogram m;
      m.frames = testutil::make_mel_utterance(p, 256, derive_seed(s, std::to_string(u)));
      mels.push_back(std::move(m));
    }
    return encoder.average_embedding(mels).vec;
  };
  const Eigen::VectorXd embed_a = embed_of(profile_a, seed + 3);
  const Eigen::VectorXd embed_b = embed_of(profile_b, seed + 4);

  auto dataset = testutil::make_gan_dataset({profile_a, profile_b}, {embed_a, embed_b},
                                            /*utterances_per_speaker=*/46,
                                            /*frames=*/506, seed + 5);

  gan::GeneratorConfig gcfg;
  gcfg.base_channels = 4;
  gcfg.block_channels = 32;
  gcfg.num_blocks = 2;
  gcfg.embed_dim = 256;
  gan::DiscriminatorConfig dcfg;
  dcfg.base_channels = 4;
  dcfg.crop_frames = 96;
  dcfg.embed_dim = 256;
  dcfg.proj_hidden = 32;
  train::TrainingConfig tcfg;
  tcfg.fixed_crop_frames = 96;
  tcfg.seed = seed;
  tcfg.g_lr = 2e-4;
  tcfg.identity_decay_steps = 0;  // constant identity weight: the fall is learning
  tcfg.steps_per_epoch = 92;
  tcfg.epochs = 40;

  train::GanTrainer trainer(gcfg, dcfg, tcfg, std::move(dataset));
  const int64_t total_steps = 1400;  // <= 3000 budget
  trainer.run_steps(total_steps);

  // (a) weighted identity loss, step-50 window vs final window.
  auto window_mean = [&](size_t lo, size_t hi) {
    double acc = 0.0;
    for (size_t i = lo; i < hi; ++i)
      acc += trainer.log()[i].identity_weight * trainer.log()[i].identity_loss;
    return acc / static_cast<double>(hi - lo);
  };
  const double at_50 = window_mean(45, 56);
  const double at_end = window_mean(static_cast<size_t>(total_steps) - 20,
                                    static_cast<size_t>(total_steps));
  c.expect(at_end <= 0.5 * at_50, "weighted identity loss fell by >= 50% (" +
                                      std::to_string(at_end) + " vs " +
                                      std::to_string(at_50) + " at step 50)");

  // Held-out toy utterances for (b) and (c).
  const FrameMatrix src = testutil::make_mel_utterance(profile_a, 400, seed + 7);
  const FrameMatrix trg_exemplar = testutil::make_mel_utterance(profile_b, 400, seed + 8);
  const gan::ConditioningPair pair{embed_a, embed_b};
  const auto& gen = trainer.generator();

  // (b) cyclic reconstruction MAE < source-vs-target MAE.
  const auto cyc = eval::cyclic_reconstruction_eval(gen, encoder, src, pair);
  audio::MelSpectrogram trg_mel;
  trg_mel.frames = trg_exemplar;
  const auto cross = eval::aligned_metrics(src, trg_exemplar,
                                           eval::dtw_align(src, trg_exemplar),
                                           audio::silence_mask(trg_mel));
  c.expect(cyc.metrics.mae < cross.mae,
           "reconstruction MAE (" + std::to_string(cyc.metrics.mae) +
               ") < source-vs-target MAE (" + std::to_string(cross.mae) + ")");

  // (c) conversion moves the utterance toward the target speaker.
  const FrameMatrix converted = gen.generate_padded(src, pair);
  audio::MelSpectrogram conv_mel, src_mel;
  conv_mel.frames = converted;
  src_mel.frames = src;
  const double e_conv = eval::speaker_similarity(encoder, conv_mel, trg_mel);
  const double e_src = eval::speaker_similarity(encoder, src_mel, trg_mel);
  c.expect(e_conv < e_src, "e_norm(converted, target) = " + std::to_string(e_conv) +
                               " < e_norm(source, target) = " + std::to_string(e_src));
  return c;
}

// ---------------------------------------------------------------------------
// 7. Zero-shot contract: conversion with embeddings from a speaker absent
//    from training completes, preserves shape, and performs no parameter
//    update.
// ---------------------------------------------------------------------------
Check criterion_7() {
  Check c;
  testutil::TempDir tmp("acceptance-zeroshot");
  const auto root = tmp.path() / "data";
  testutil::write_wav_dataset(root, 3, 4, 1.0, 707);

  data::RunConfig cfg;
  cfg.data_root = root;
  cfg.work_dir = tmp.path() / "work";
  cfg.seed = 707;
  cfg.encoder.hidden = 24;
  cfg.encoder.layers = 1;
  cfg.encoder_training.speakers_per_batch = 2;
  cfg.encoder_training.utts_per_speaker = 2;
  cfg.encoder_training.crop_frames = 24;
  cfg.encoder_training.epochs = 1;
  cfg.encoder_training.steps_per_epoch = 6;
  cfg.generator.base_channels = 2;
  cfg.generator.block_channels = 8;
  cfg.generator.num_blocks = 1;
  cfg.discriminator.base_channels = 2;
  cfg.discriminator.proj_hidden = 8;
  cfg.discriminator.crop_frames = 32;
  cfg.training.fixed_crop_frames = 32;
  cfg.training.epochs = 1;
  cfg.training.steps_per_epoch = 5;
  cfg.training.g_lr = 1e-3;
  cfg.vocoder_iterations = 3;
  cfg.embedding_utterances = 2;
  cfg.finalize();

  data::IngestOptions opts;
  opts.seed = cfg.seed;
  opts.holdout_speakers = {"spk2"};  // spk2 never enters training
  (void)cli::preprocess_command(cfg, opts);
  (void)cli::train_encoder_command(cfg);
  cli::train_command(cfg);

  cli::ConvertRequest req;
  req.source_wav = root / "spk0" / "utt3.wav";
  req.source_speaker = "spk0";
  req.target_speaker = "spk2";
  req.target_utterances = {root / "spk2" / "utt0.wav", root / "spk2" / "utt1.wav"};
  req.output_wav = tmp.path() / "zero_shot.wav";
  req.skip_vocoder = true;

  const uint64_t updates_before = nn::stats::optimizer_steps();
  const auto result = cli::convert_command(cfg, req);
  c.expect(nn::stats::optimizer_steps() == updates_before,
           "no optimizer update during conversion");
  const auto src_mel = audio::mel_spectrogram(audio::load_waveform(req.source_wav));
  c.expect(result.converted.rows() == src_mel.num_frames(), "output frame count matches");
  c.expect(result.converted.cols() == 80, "output bin count is 80");
  c.expect(result.converted.allFinite(), "output is finite");
  return c;
}

// ---------------------------------------------------------------------------
// 8. Speed scaling: generator ms per second of audio on a 10 s input within
//    25% of the 2.5 s input (convolutional linear scaling). Reference
//    hardware numbers are reported for context only.
// ---------------------------------------------------------------------------
Check criterion_8() {
  Check c;
  data::RunConfig cfg;
  cfg.seed = 808;
  cfg.generator.base_channels = 8;
  cfg.generator.block_channels = 32;
  cfg.generator.num_blocks = 2;
  cfg.finalize();

  const auto short_run = cli::bench_command(cfg, "generator", 2.5);
  const auto long_run = cli::bench_command(cfg, "generator", 10.0);
  const double ratio = long_run.speed.ms_per_second / short_run.speed.ms_per_second;
  c.expect(ratio > 0.75 && ratio < 1.25,
           "ms/s scales linearly (ratio " + std::to_string(ratio) + ")");
  std::cout << "  generator: " << short_run.speed.ms_per_second << " ms/s at 2.5 s, "
            << long_run.speed.ms_per_second << " ms/s at 10 s (this host)\n"
            << "  published reference values, different hardware, not asserted: "
               "1.88 ms/s for this system, 10.99 ms/s for the recurrent baseline\n";
  return c;
}

// ---------------------------------------------------------------------------
// 9. Evaluation-protocol fidelity: hand-computed aligned metrics reproduced
//    to 1e-6; mutating silent target frames leaves every metric unchanged.
// ---------------------------------------------------------------------------
Check criterion_9() {
  Check c;
  // Two equal-length sequences with two bins; the path is the diagonal.
  FrameMatrix conv(2, 2), target(2, 2);
  conv << 1.0, 2.0, 3.0, 4.0;
  target << 2.0, 4.0, 3.0, 0.0;
  // Hand computation:
  //  pair 0: |1-2| + |2-4| = 3; squares 1 + 4 = 5; cos = (2+8)/(sqrt5*sqrt20) = 1
  //  pair 1: |3-3| + |4-0| = 4; squares 0 + 16 = 16; cos = 9/(5*3) = 0.6
  //  MAE = 7/4 = 1.75, MSE = 21/4 = 5.25, cos = 0.8
  const auto path = eval::dtw_align(conv, target);
  audio::SilenceMask mask;
  mask.nonsilent = {true, true};
  const auto m = eval::aligned_metrics(conv, target, path, mask);
  c.expect(std::abs(m.mae - 1.75) < 1e-6, "hand-computed MAE");
  c.expect(std::abs(m.mse - 5.25) < 1e-6, "hand-computed MSE");
  c.expect(std::abs(m.cos_theta - 0.8) < 1e-6, "hand-computed cosine");
  c.expect(m.frames_evaluated == 2, "frames evaluated");

  // Mark one frame silent and vandalize it; nothing may move.
  Rng rng(909);
  FrameMatrix a(6, 5), b(6, 5);
  for (int64_t i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  for (int64_t i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
  const auto p2 = eval::dtw_align(a, b);
  audio::SilenceMask mask2;
  mask2.nonsilent = {true, false, true, true, false, true};
  const auto before = eval::aligned_metrics(a, b, p2, mask2);
  FrameMatrix mutated = b;
  mutated.row(1).setConstant(1e9);
  mutated.row(4).setConstant(-1e9);
  const auto after = eval::aligned_metrics(a, mutated, p2, mask2);
  c.expect(before.mae == after.mae && before.mse == after.mse &&
               before.cos_theta == after.cos_theta,
           "silent-frame mutations do not change the metrics");
  return c;
}

// ---------------------------------------------------------------------------
// 10. Encoder invariants: unit norm within 1e-5 across random inputs; GE2E
//     invariance under within-speaker permutation; toy 8-speaker training
//     halves the loss within 200 steps.
// ---------------------------------------------------------------------------
Check criterion_10() {
  Check c;
  speaker::EncoderConfig ecfg;
  ecfg.hidden = 32;
  ecfg.layers = 2;
  speaker::SpeakerEncoder enc(ecfg, 1001);
  Rng rng(1002);
  for (int trial = 0; trial < 20; ++trial) {
    audio::MelSpectrogram mel;
    mel.frames = testutil::make_mel_utterance(
        testutil::speaker_profile(static_cast<int>(rng.randint(0, 7))),
        rng.randint(1, 200), 1010 + static_cast<uint64_t>(trial));
    const auto e = enc.encode(mel);
    c.expect(std::abs(e.norm() - 1.0) < 1e-5, "embedding unit norm within 1e-5");
    c.expect(e.vec.size() == 256, "embedding dimension 256");
  }

  {  // permutation invariance
    std::vector<std::vector<Eigen::VectorXd>> batch(3);
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 4; ++i) batch[static_cast<size_t>(j)].push_back(
          unit_vec(16, static_cast<uint64_t>(100 + 10 * j + i)));
    const double base = speaker::ge2e_loss_value(batch, 10.0, -5.0);
    auto shuffled = batch;
    std::swap(shuffled[1][0], shuffled[1][3]);
    std::swap(shuffled[1][1], shuffled[1][2]);
    c.expect(std::abs(speaker::ge2e_loss_value(shuffled, 10.0, -5.0) - base) < 1e-9,
             "ge2e invariant under within-speaker permutation");
  }

  {  // toy training halves the loss in 200 steps
    const auto dataset = testutil::make_encoder_dataset(8, 6, 96, 1003);
    speaker::EncoderTrainConfig etc;
    etc.speakers_per_batch = 8;
    etc.utts_per_speaker = 3;
    etc.crop_frames = 32;
    etc.epochs = 1;
    etc.steps_per_epoch = 200;
    etc.lr_start = 2e-3;
    etc.lr_final = 2e-3;
    etc.seed = 1004;
    speaker::SpeakerEncoder trainee(ecfg, 1005);
    const auto stats = train_speaker_encoder(trainee, dataset, etc);
    c.expect(stats.losses.size() == 200, "200 training steps");
    const double first = stats.losses.front();
    const double last = stats.losses.back();
    c.expect(last < 0.5 * first, "final ge2e loss " + std::to_string(last) +
                                     " < half of initial " + std::to_string(first));
  }
  return c;
}

struct Criterion {
  int number;
  const char* summary;
  std::function<Check()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
      only = std::atoi(argv[i + 1]);
  }

  const std::vector<Criterion> criteria{
      {1, "conditional instance norm statistics (mean=beta, std=|gamma|, 1e-4)", criterion_1},
      {2, "loss identities and exact weighted combination", criterion_2},
      {3, "gradient oracle vs central finite differences (rel 1e-3, float64)", criterion_3},
      {4, "alignment cost equals exhaustive enumeration on 500 instances", criterion_4},
      {5, "training contracts hold at every step of a 300-step run", criterion_5},
      {6, "toy overfit: identity-loss halving, reconstruction, speaker shift", criterion_6},
      {7, "zero-shot conversion: valid output, no parameter update", criterion_7},
      {8, "generator speed scales linearly with input duration (within 25%)", criterion_8},
      {9, "evaluation metrics match hand computation; silent frames inert", criterion_9},
      {10, "encoder invariants and 200-step ge2e halving", criterion_10},
  };

  bool all_ok = true;
  for (const auto& criterion : criteria) {
    if (only != 0 && criterion.number != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Check result;
    try {
      result = criterion.run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail << "  EXCEPTION: " << e.what() << "\n";
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (result.ok ? "[PASS]" : "[FAIL]") << " criterion " << criterion.number
              << ": " << criterion.summary << " (" << secs << " s)\n"
              << result.detail.str();
    all_ok = all_ok && result.ok;
  }
  return all_ok ? 0 : 1;
}
