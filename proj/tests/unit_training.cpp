// tests/unit_training.cpp

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

#include <doctest.h>

#include <set>

#include "testutil/synth.h"
#include "zsvc/train/losses.h"
#include "zsvc/train/lr_probe.h"

using namespace zsvc;
using audio::FrameMatrix;
using train::CropMode;
using train::GanDataset;
using train::GanTrainer;
using train::TrainingConfig;

namespace {

Eigen::VectorXd unit_vec(int dim, uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.normal();
  v.normalize();
  return v;
}

// Tiny-but-real adversarial setup shared by the trainer tests.
struct ToySetup {
  gan::GeneratorConfig gen_cfg;
  gan::DiscriminatorConfig disc_cfg;
  TrainingConfig train_cfg;
  GanDataset dataset;

  explicit ToySetup(uint64_t seed = 5, int64_t utt_frames = 80) {
    gen_cfg.base_channels = 2;
    gen_cfg.block_channels = 8;
    gen_cfg.num_blocks = 1;
    gen_cfg.embed_dim = 8;
    disc_cfg.base_channels = 2;
    disc_cfg.embed_dim = 8;
    disc_cfg.proj_hidden = 8;
    disc_cfg.crop_frames = 32;
    train_cfg.fixed_crop_frames = 32;
    train_cfg.seed = seed;
    train_cfg.g_lr = 1e-3;
    train_cfg.steps_per_epoch = 4;
    train_cfg.epochs = 4;
    train_cfg.abort_snapshot_interval_steps = 5;

    std::vector<testutil::SpeakerProfile> profiles{testutil::speaker_profile(0),
                                                   testutil::speaker_profile(3)};
    std::vector<Eigen::VectorXd> embeds{unit_vec(8, 1), unit_vec(8, 2)};
    dataset = testutil::make_gan_dataset(profiles, embeds, 3, utt_frames, seed);
  }
};

}  // namespace

TEST_CASE("identity loss formula") {
  const auto identity = [](const FrameMatrix& x, const Eigen::VectorXd&,
                           const Eigen::VectorXd&) { return x; };
  FrameMatrix x = FrameMatrix::Random(5, 4);
  const Eigen::VectorXd e = unit_vec(8, 3);
  CHECK(train::identity_loss(identity, x, e) == 0.0);

  const auto plus_one = [](const FrameMatrix& m, const Eigen::VectorXd&,
                           const Eigen::VectorXd&) -> FrameMatrix {
    return m.array() + 1.0;
  };
  // || ones(n) ||_2 = sqrt(n)
  CHECK(train::identity_loss(plus_one, x, e) == doctest::Approx(std::sqrt(20.0)));
  CHECK(train::identity_loss(plus_one, x, e) >= 0.0);
}

TEST_CASE("cycle loss is the squared L1 cyclic error") {
  const auto identity = [](const FrameMatrix& x, const Eigen::VectorXd&,
                           const Eigen::VectorXd&) { return x; };
  FrameMatrix x = FrameMatrix::Random(2, 2);
  const Eigen::VectorXd e = unit_vec(8, 4);
  CHECK(train::cycle_loss(identity, x, e, e) == 0.0);

  // The round trip lands 0.5 off in each of 4 entries: (4 * 0.5)^2 = 4.
  const auto off_by_half = [](const FrameMatrix& m, const Eigen::VectorXd&,
                              const Eigen::VectorXd& trg) -> FrameMatrix {
    // Only the backward direction (target embedding all zeros below) shifts.
    if (trg.isZero()) return m.array() + 0.5;
    return m;
  };
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(8);
  CHECK(train::cycle_loss(off_by_half, x, zero, e) == doctest::Approx(4.0));

  // Squaring check: equals the unsquared L1 error squared on random data.
  Rng rng(9);
  const auto noisy = [&](const FrameMatrix& m, const Eigen::VectorXd&,
                         const Eigen::VectorXd&) -> FrameMatrix {
    return m.array() + 0.25;
  };
  FrameMatrix y = FrameMatrix::Random(3, 5);
  const FrameMatrix once = noisy(y, zero, zero);
  const FrameMatrix twice = noisy(once, zero, zero);
  const double l1 = (y - twice).cwiseAbs().sum();
  CHECK(train::cycle_loss(noisy, y, zero, zero) == doctest::Approx(l1 * l1));
}

TEST_CASE("adversarial losses against the LSGAN targets") {
  FrameMatrix x = FrameMatrix::Random(4, 4);
  const Eigen::VectorXd e = unit_vec(8, 5);

  const auto critic_a = [](const FrameMatrix&, const Eigen::VectorXd&,
                           const Eigen::VectorXd&) { return 1.0; };
  CHECK(train::generator_adv_loss(critic_a, x, e, e, 1.0) == 0.0);

  const auto critic_zero = [](const FrameMatrix&, const Eigen::VectorXd&,
                              const Eigen::VectorXd&) { return 0.0; };
  CHECK(train::generator_adv_loss(critic_zero, x, e, e, 1.0) == doctest::Approx(1.0));

  // Critic at its optimum: fake scored at b, real at a.
  const auto split_critic = [&x](const FrameMatrix& m, const Eigen::VectorXd&,
                                 const Eigen::VectorXd&) {
    return (m - x).cwiseAbs().sum() < 1e-12 ? 1.0 : 0.0;  // real -> 1, else 0
  };
  FrameMatrix fake = x.array() + 2.0;
  CHECK(train::discriminator_adv_loss(split_critic, fake, x, e, e, 1.0, 0.0) == 0.0);
  CHECK(train::discriminator_adv_loss(critic_a, fake, x, e, e, 1.0, 0.0) ==
        doctest::Approx(1.0));  // fake term (1-0)^2, real term (1-1)^2

  // Swapping targets together with the scores leaves the value unchanged.
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const double sf = rng.normal(), sr = rng.normal();
    const double a = rng.normal(), b = rng.normal();
    const double v1 = (sf - b) * (sf - b) + (sr - a) * (sr - a);
    const double v2 = (sr - a) * (sr - a) + (sf - b) * (sf - b);
    CHECK(v1 == doctest::Approx(v2));
  }
}

TEST_CASE("total generator loss is the weighted combination") {
  CHECK(train::total_generator_loss(0.1, 0.2, 0.3, 5.0, 10.0) == doctest::Approx(2.8));
  CHECK(train::total_generator_loss(0.0, 0.0, 0.0, 5.0, 10.0) == 0.0);
  CHECK(train::total_generator_loss(7.0, 0.2, 0.3, 0.0, 10.0) ==
        doctest::Approx(2.3));  // decayed identity weight contributes nothing
}

TEST_CASE("graph losses agree with the plain formulas on a real tiny model") {
  ToySetup toy(21);
  GanTrainer trainer(toy.gen_cfg, toy.disc_cfg, toy.train_cfg, toy.dataset);
  const auto& gen = trainer.generator();
  const auto& disc = trainer.discriminator();
  const Eigen::VectorXd s = toy.dataset.speakers[0].embedding;
  const Eigen::VectorXd t = toy.dataset.speakers[1].embedding;
  const FrameMatrix x = toy.dataset.speakers[0].utterances[0].topRows(32);

  const auto convert = [&](const FrameMatrix& m, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& b) {
    return gen.generate(m, gan::ConditioningPair{a, b});
  };
  const auto critic = [&](const FrameMatrix& m, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& b) {
    return disc.discriminate(m, gan::ConditioningPair{a, b});
  };

  // Rebuild the same quantities through the autodiff graph.
  nn::Var xv = nn::Var::constant(gan::frames_to_input(x));
  nn::Var sv = nn::Var::constant(gan::embedding_to_tensor(s));
  nn::Var tv = nn::Var::constant(gan::embedding_to_tensor(t));
  const double id_graph = nn::norm2(nn::sub(gen.forward(xv, sv, sv), xv)).scalar_value();
  CHECK(id_graph == doctest::Approx(train::identity_loss(convert, x, s)).epsilon(1e-10));

  nn::Var conv = gen.forward(xv, sv, tv);
  nn::Var back = gen.forward(conv, tv, sv);
  const double cyc_graph = nn::square(nn::sum_abs(nn::sub(xv, back))).scalar_value();
  CHECK(cyc_graph == doctest::Approx(train::cycle_loss(convert, x, s, t)).epsilon(1e-10));

  const double adv_graph =
      nn::square(nn::add_scalar(disc.forward(conv, sv, tv), -1.0)).scalar_value();
  const FrameMatrix converted = convert(x, s, t);
  CHECK(adv_graph ==
        doctest::Approx(train::generator_adv_loss(critic, converted, s, t, 1.0))
            .epsilon(1e-10));
}

TEST_CASE("crop sampler: variable support, fixed constant, repeat padding") {
  TrainingConfig cfg;
  Rng rng(31);
  std::set<int> seen;
  for (int i = 0; i < 10000; ++i) {
    const int k = train::sample_crop_length(CropMode::kVariable, cfg, rng);
    CHECK(k >= 96);
    CHECK(k <= 320);
    CHECK(k % 32 == 0);
    seen.insert(k);
  }
  CHECK(seen.size() == 8);  // every multiple of 32 in [96, 320] observed

  for (int i = 0; i < 100; ++i)
    CHECK(train::sample_crop_length(CropMode::kFixed, cfg, rng) == 256);

  // A 50-frame utterance still yields a 96-frame crop via tiling.
  FrameMatrix shorty(50, 80);
  for (int r = 0; r < 50; ++r) shorty.row(r).setConstant(r);
  cfg.crop_min = cfg.crop_max = 96;
  const FrameMatrix crop = train::sample_training_crop(shorty, CropMode::kVariable, cfg, rng);
  CHECK(crop.rows() == 96);
  for (int r = 1; r < 96; ++r) {
    const double prev = crop(r - 1, 0), cur = crop(r, 0);
    CHECK((cur == prev + 1.0 || (prev == 49.0 && cur == 0.0)));
  }
}

namespace {

// 1-d quadratic objective 0.5 * lambda * x^2 under plain gradient descent;
// the largest loss decrease over a fixed budget belongs to the rate closest
// to 1/lambda.
struct QuadraticClient : train::ProbeClient {
  double lambda = 4.0;
  double x = 10.0;
  std::unique_ptr<train::ProbeClient> clone() const override {
    return std::make_unique<QuadraticClient>(*this);
  }
  double step(double lr) override {
    const double loss = 0.5 * lambda * x * x;
    x -= lr * lambda * x;
    return loss;
  }
};

}  // namespace

TEST_CASE("lr range probe picks the analytic optimum on a quadratic") {
  QuadraticClient client;
  // Optimal step for lambda = 4 is 0.25.
  const std::vector<double> grid{0.01, 0.05, 0.26, 0.45, 0.6};
  CHECK(train::lr_range_probe(client, grid, 50) == doctest::Approx(0.26));
  // The probe never mutates the original client.
  CHECK(client.x == 10.0);

  CHECK(train::lr_range_probe(client, {0.123}, 50) == doctest::Approx(0.123));

  QuadraticClient explodes;
  explodes.lambda = 4.0;
  CHECK_THROWS_AS((void)train::lr_range_probe(explodes, {1e8, 1e9}, 60), ConfigError);
}

TEST_CASE("trainer enforces the step contracts") {
  ToySetup toy(41);
  GanTrainer trainer(toy.gen_cfg, toy.disc_cfg, toy.train_cfg, toy.dataset);
  trainer.run_steps(12);
  REQUIRE(trainer.log().size() == 12);
  for (const auto& rec : trainer.log()) {
    CHECK(rec.g_grad_norm <= toy.train_cfg.clip_norm + 1e-6);
    CHECK(rec.d_grad_norm <= toy.train_cfg.clip_norm + 1e-6);
    CHECK(rec.d_lr == doctest::Approx(0.5 * rec.g_lr));
    CHECK(rec.crop_frames == toy.train_cfg.fixed_crop_frames);
    CHECK_FALSE(rec.dropout_active);  // start epoch is far away
    CHECK(rec.identity_loss >= 0.0);
    CHECK(rec.cycle_loss >= 0.0);
    CHECK(rec.g_adv_loss >= 0.0);
    CHECK(rec.d_adv_loss >= 0.0);
    CHECK(rec.d_steps >= toy.train_cfg.d_steps_min);
    CHECK(rec.d_steps <= toy.train_cfg.d_steps_max);
  }
  // Identity weight decays linearly from 5 toward 0 over the schedule.
  CHECK(trainer.log().front().identity_weight == doctest::Approx(5.0));
  CHECK(trainer.log().back().identity_weight < 5.0);
}

TEST_CASE("identical seeds give identical logs") {
  ToySetup toy(43);
  GanTrainer a(toy.gen_cfg, toy.disc_cfg, toy.train_cfg, toy.dataset);
  GanTrainer b(toy.gen_cfg, toy.disc_cfg, toy.train_cfg, toy.dataset);
  a.run_steps(6);
  b.run_steps(6);
  for (size_t i = 0; i < 6; ++i) {
    CHECK(a.log()[i].total_g_loss == b.log()[i].total_g_loss);
    CHECK(a.log()[i].d_adv_loss == b.log()[i].d_adv_loss);
    CHECK(a.log()[i].g_grad_norm == b.log()[i].g_grad_norm);
  }
}

TEST_CASE("dropout activates at the configured epoch") {
  ToySetup toy(47);
  toy.train_cfg.dropout_start_epoch = 2;  // epochs are 4 steps long here
  GanTrainer trainer(toy.gen_cfg, toy.disc_cfg, toy.train_cfg, toy.dataset);
  trainer.run_steps(12);
  for (const auto& rec : trainer.log()) {
    CHECK(rec.dropout_active == (rec.epoch >= 2));
  }
}

TEST_CASE("checkpoint resume reproduces the uninterrupted run") {
  testutil::TempDir tmp("resume");
  ToySetup toy(53);

  GanTrainer full(toy.gen_cfg, toy.disc_cfg, toy.train_cfg, toy.dataset);
  full.run_steps(8);

  GanTrainer part(toy.gen_cfg, toy.disc_cfg, toy.train_cfg, toy.dataset);
  part.run_steps(5);
  const auto ckpt = tmp.path() / "state.ckpt";
  part.save_checkpoint(ckpt);

  GanTrainer resumed = GanTrainer::resume(ckpt, toy.dataset);
  CHECK(resumed.step() == 5);
  resumed.run_steps(3);

  for (int i = 0; i < 3; ++i) {
    const auto& a = full.log()[static_cast<size_t>(5 + i)];
    const auto& b = resumed.log()[static_cast<size_t>(i)];
    CHECK(a.total_g_loss == b.total_g_loss);
    CHECK(a.d_adv_loss == b.d_adv_loss);
  }
}

TEST_CASE("divergence aborts with a last-known-good dump") {
  testutil::TempDir tmp("diverge");
  ToySetup toy(59);
  toy.train_cfg.g_lr = 1e14;  // guaranteed blow-up
  GanTrainer trainer(toy.gen_cfg, toy.disc_cfg, toy.train_cfg, toy.dataset);
  const auto dump = tmp.path() / "last_good.ckpt";
  trainer.set_abort_dump_path(dump);
  CHECK_THROWS_AS(trainer.run_steps(50), DivergenceError);
  CHECK(std::filesystem::exists(dump));
  const auto bundle = nn::load_named_tensors(dump);
  CHECK(bundle.kind == "gan-training-state");
}

TEST_CASE("trainer rejects single-speaker datasets and mismatched embeddings") {
  ToySetup toy(61);
  GanDataset solo;
  solo.speakers.push_back(toy.dataset.speakers[0]);
  CHECK_THROWS_AS(GanTrainer(toy.gen_cfg, toy.disc_cfg, toy.train_cfg, solo), DataError);

  GanDataset wrong = toy.dataset;
  wrong.speakers[0].embedding = Eigen::VectorXd::Zero(5);
  CHECK_THROWS_AS(GanTrainer(toy.gen_cfg, toy.disc_cfg, toy.train_cfg, wrong), ConfigError);
}

TEST_CASE("training config validation") {
  TrainingConfig cfg;
  cfg.validate();
  TrainingConfig bad = cfg;
  bad.real_target = bad.fake_target = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.clip_norm = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.crop_min = 64;  // outside [96, 320]
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.crop_step = 48;  // not a multiple of 32
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  // JSON round trip.
  const TrainingConfig back = TrainingConfig::from_json(cfg.to_json());
  CHECK(back.identity_weight == cfg.identity_weight);
  CHECK(back.fixed_crop_frames == cfg.fixed_crop_frames);
  CHECK(back.seed == cfg.seed);
}
