// tests/unit_gan.cpp

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

#include "testutil/gradcheck.h"
#include "testutil/synth.h"
#include "zsvc/gan/discriminator.h"

using namespace zsvc;
using gan::ConditioningPair;
using gan::Discriminator;
using gan::DiscriminatorConfig;
using gan::Generator;
using gan::GeneratorConfig;

namespace {

GeneratorConfig tiny_gen(int embed = 16) {
  GeneratorConfig cfg;
  cfg.base_channels = 4;
  cfg.block_channels = 16;
  cfg.num_blocks = 2;
  cfg.embed_dim = embed;
  return cfg;
}

DiscriminatorConfig tiny_disc(int crop, int embed = 16) {
  DiscriminatorConfig cfg;
  cfg.base_channels = 4;
  cfg.crop_frames = crop;
  cfg.embed_dim = embed;
  cfg.proj_hidden = 16;
  return cfg;
}

Eigen::VectorXd unit_vec(int dim, uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.normal();
  v.normalize();
  return v;
}

nn::Var embed_var(const Eigen::VectorXd& v) {
  return nn::Var::constant(gan::embedding_to_tensor(v));
}

}  // namespace

TEST_CASE("conditional instance norm matches the per-channel formula") {
  // Already-standardized input with gamma=1, beta=0 passes through.
  Rng rng(3);
  nn::Tensor x = nn::Tensor::normal({1, 64}, 1.0, rng);
  const double mu = x.array().mean();
  const double sd = std::sqrt((x.array() - mu).square().mean());
  x.array() = (x.array() - mu) / sd;
  nn::Var out = nn::conditional_instance_norm(
      nn::Var::constant(x), nn::Var::constant(nn::Tensor::scalar(1.0)),
      nn::Var::constant(nn::Tensor::scalar(0.0)));
  CHECK((out.value().array() - x.array()).abs().maxCoeff() < 1e-4);

  // f = [1,2,3], gamma = 2, beta = 1: population sigma = sqrt(2/3).
  nn::Var out2 = nn::conditional_instance_norm(
      nn::Var::constant(nn::Tensor::from({1, 3}, {1.0, 2.0, 3.0})),
      nn::Var::constant(nn::Tensor::scalar(2.0)),
      nn::Var::constant(nn::Tensor::scalar(1.0)));
  CHECK(out2.value()[0] == doctest::Approx(-1.4495).epsilon(1e-3));
  CHECK(out2.value()[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(out2.value()[2] == doctest::Approx(3.4495).epsilon(1e-3));

  // Constant channel: epsilon absorbs the zero variance, output = beta.
  nn::Var out3 = nn::conditional_instance_norm(
      nn::Var::constant(nn::Tensor::from({1, 3}, {5.0, 5.0, 5.0})),
      nn::Var::constant(nn::Tensor::scalar(3.0)),
      nn::Var::constant(nn::Tensor::scalar(7.0)));
  for (int i = 0; i < 3; ++i) CHECK(out3.value()[i] == doctest::Approx(7.0));

  // Channels are normalized independently.
  nn::Var out4 = nn::conditional_instance_norm(
      nn::Var::constant(nn::Tensor::from({2, 2}, {0.0, 2.0, 10.0, 30.0})),
      nn::Var::constant(nn::Tensor::from({2}, {1.0, 1.0})),
      nn::Var::constant(nn::Tensor::from({2}, {0.0, 100.0})));
  CHECK(out4.value()[0] == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(out4.value()[2] == doctest::Approx(99.0).epsilon(1e-4));
}

TEST_CASE("glu splits channels: gate of zeros halves the first half") {
  nn::Tensor x({4, 3});
  for (nn::Index i = 0; i < 6; ++i) x[i] = static_cast<double>(i + 1);
  // Second half (the gate) stays zero.
  nn::Var y = nn::glu0(nn::Var::constant(x));
  CHECK(y.shape() == std::vector<nn::Index>{2, 3});
  for (nn::Index i = 0; i < 6; ++i)
    CHECK(y.value()[i] == doctest::Approx(0.5 * x[i]));
}

TEST_CASE("conditional block halves channels through the gate and is deterministic") {
  const GeneratorConfig cfg = tiny_gen();
  Generator gen(cfg, 5);
  Rng rng(7);
  nn::Var x = nn::Var::constant(nn::Tensor::normal({cfg.block_channels, 12}, 1.0, rng));
  nn::Var cond = nn::Var::constant(nn::Tensor::normal({2 * cfg.embed_dim}, 1.0, rng));
  nn::Var a = gen.conditional_block(0, x, cond);
  nn::Var b = gen.conditional_block(0, x, cond);
  CHECK(a.shape() == std::vector<nn::Index>{cfg.block_channels, 12});
  CHECK((a.value().array() - b.value().array()).abs().maxCoeff() == 0.0);
  CHECK_THROWS_AS((void)gen.conditional_block(7, x, cond), ConfigError);
}

TEST_CASE("generator preserves shape for several lengths") {
  const GeneratorConfig cfg = tiny_gen();
  Generator gen(cfg, 11);
  const ConditioningPair pair{unit_vec(cfg.embed_dim, 1), unit_vec(cfg.embed_dim, 2)};
  for (int64_t t : {96, 128, 256}) {
    const audio::FrameMatrix mel =
        testutil::make_mel_utterance(testutil::speaker_profile(0), t, 19);
    const audio::FrameMatrix out = gen.generate(mel, pair);
    CHECK(out.rows() == t);
    CHECK(out.cols() == 80);
    CHECK(out.allFinite());
  }
}

TEST_CASE("generator inference is deterministic and validates input length") {
  const GeneratorConfig cfg = tiny_gen();
  Generator gen(cfg, 13);
  const ConditioningPair pair{unit_vec(cfg.embed_dim, 3), unit_vec(cfg.embed_dim, 4)};
  const audio::FrameMatrix mel =
      testutil::make_mel_utterance(testutil::speaker_profile(1), 64, 23);
  CHECK((gen.generate(mel, pair) - gen.generate(mel, pair)).cwiseAbs().maxCoeff() == 0.0);

  const audio::FrameMatrix odd = mel.topRows(63);
  CHECK_THROWS_AS((void)gen.generate(odd, pair), ConfigError);
  const audio::FrameMatrix padded_out = gen.generate_padded(odd, pair);
  CHECK(padded_out.rows() == 63);

  // A random unit-norm target embedding is a valid synthetic speaker.
  const ConditioningPair random_pair{unit_vec(cfg.embed_dim, 5),
                                     unit_vec(cfg.embed_dim, 99)};
  CHECK(gen.generate(mel, random_pair).allFinite());
}

TEST_CASE("generator checkpoint round trip; mismatched architecture refuses") {
  testutil::TempDir tmp("gen-ckpt");
  const GeneratorConfig cfg = tiny_gen();
  Generator gen(cfg, 17);
  const auto path = tmp.path() / "generator.ckpt";
  gen.save(path, R"({"seed":17})");

  Generator loaded = Generator::load(path);
  const ConditioningPair pair{unit_vec(cfg.embed_dim, 6), unit_vec(cfg.embed_dim, 7)};
  const audio::FrameMatrix mel =
      testutil::make_mel_utterance(testutil::speaker_profile(2), 32, 29);
  CHECK((loaded.generate(mel, pair) - gen.generate(mel, pair)).cwiseAbs().maxCoeff() == 0.0);

  GeneratorConfig other = cfg;
  other.num_blocks = 3;
  Generator wrong(other, 18);
  CHECK_THROWS_AS(wrong.load_weights(path), ConfigError);
}

TEST_CASE("tiny generator end-to-end gradient smoke test") {
  const GeneratorConfig cfg = tiny_gen();
  Generator gen(cfg, 19);
  Rng rng(31);
  nn::Var x = nn::Var::constant(nn::Tensor::normal({1, 80, 8}, 1.0, rng));
  nn::Var s = nn::Var::constant(gan::embedding_to_tensor(unit_vec(cfg.embed_dim, 8)));
  nn::Var t = nn::Var::constant(gan::embedding_to_tensor(unit_vec(cfg.embed_dim, 9)));
  auto loss_fn = [&]() { return nn::norm2(gen.forward(x, s, t)); };
  std::vector<nn::Var> leaves;
  for (auto& [n, v] : gen.params().items()) leaves.push_back(v);
  const auto report = testutil::check_gradients(loss_fn, leaves, 2, rng);
  CHECK(report.max_rel_err < 1e-3);
}

TEST_CASE("critic returns a deterministic scalar and rejects bad crops") {
  const int K = 32;
  const DiscriminatorConfig cfg = tiny_disc(K);
  Discriminator disc(cfg, 23);
  const ConditioningPair pair{unit_vec(cfg.embed_dim, 10), unit_vec(cfg.embed_dim, 11)};
  const audio::FrameMatrix crop =
      testutil::make_mel_utterance(testutil::speaker_profile(3), K, 37);

  const double a = disc.discriminate(crop, pair);
  const double b = disc.discriminate(crop, pair);
  CHECK(a == b);
  CHECK(std::isfinite(a));

  CHECK_THROWS_AS((void)disc.discriminate(crop.topRows(K - 1), pair), DataError);

  // Dropout produces a (seeded) different view of the input.
  Rng rng(41);
  const double with_dropout = disc.discriminate(crop, pair, true, 0.3, &rng);
  CHECK(std::isfinite(with_dropout));
}

TEST_CASE("projection head is the only conditioning path") {
  const int K = 32;
  const DiscriminatorConfig cfg = tiny_disc(K);
  Discriminator disc(cfg, 29);
  // Zero the projection layers; the output must ignore the embedding pair.
  for (auto& [name, v] : disc.params().items())
    if (name.rfind("proj", 0) == 0) v.node()->value.set_zero();

  const audio::FrameMatrix crop =
      testutil::make_mel_utterance(testutil::speaker_profile(4), K, 43);
  const ConditioningPair p1{unit_vec(cfg.embed_dim, 12), unit_vec(cfg.embed_dim, 13)};
  const ConditioningPair p2{unit_vec(cfg.embed_dim, 14), unit_vec(cfg.embed_dim, 15)};
  CHECK(disc.discriminate(crop, p1) == disc.discriminate(crop, p2));
}

TEST_CASE("global sum pooling is additive over feature-map segments") {
  const int K = 32;
  const DiscriminatorConfig cfg = tiny_disc(K);
  Discriminator disc(cfg, 31);
  Rng rng(47);
  nn::Var x = nn::Var::constant(nn::Tensor::normal({1, 80, K}, 1.0, rng));
  nn::Var fmap = disc.features(x);
  const auto shape = fmap.value().shape();
  REQUIRE(shape.size() == 3);

  nn::Var whole = Discriminator::global_sum_pool(fmap);
  // Split the feature map along time and pool the halves separately.
  const nn::Index w = shape[2];
  nn::Tensor lt({shape[0], shape[1], w / 2}), rt({shape[0], shape[1], w - w / 2});
  const nn::Tensor& full = fmap.value();
  for (nn::Index c = 0; c < shape[0]; ++c)
    for (nn::Index h = 0; h < shape[1]; ++h)
      for (nn::Index j = 0; j < w; ++j) {
        const double v = full[(c * shape[1] + h) * w + j];
        if (j < w / 2)
          lt[(c * shape[1] + h) * (w / 2) + j] = v;
        else
          rt[(c * shape[1] + h) * (w - w / 2) + (j - w / 2)] = v;
      }
  nn::Var sum_parts = nn::add(Discriminator::global_sum_pool(nn::Var::constant(lt)),
                              Discriminator::global_sum_pool(nn::Var::constant(rt)));
  CHECK((whole.value().array() - sum_parts.value().array()).abs().maxCoeff() < 1e-9);
}

TEST_CASE("critic checkpoint round trip and architecture guard") {
  testutil::TempDir tmp("disc-ckpt");
  const DiscriminatorConfig cfg = tiny_disc(32);
  Discriminator disc(cfg, 37);
  const auto path = tmp.path() / "critic.ckpt";
  disc.save(path, "{}");
  Discriminator loaded = Discriminator::load(path);
  const ConditioningPair pair{unit_vec(cfg.embed_dim, 16), unit_vec(cfg.embed_dim, 17)};
  const audio::FrameMatrix crop =
      testutil::make_mel_utterance(testutil::speaker_profile(5), 32, 53);
  CHECK(loaded.discriminate(crop, pair) == disc.discriminate(crop, pair));

  DiscriminatorConfig other = cfg;
  other.crop_frames = 64;
  Discriminator wrong(other, 38);
  CHECK_THROWS_AS(wrong.load_weights(path), ConfigError);
}
