// tests/unit_speaker.cpp

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

#include <cmath>

#include "testutil/gradcheck.h"
#include "testutil/synth.h"
#include "zsvc/speaker/embedding_store.h"
#include "zsvc/speaker/ge2e.h"

using namespace zsvc;
using speaker::EncoderConfig;
using speaker::SpeakerEncoder;

namespace {

EncoderConfig tiny_config() {
  EncoderConfig cfg;
  cfg.hidden = 32;
  cfg.layers = 2;
  return cfg;  // embedding stays 256-d
}

audio::MelSpectrogram mel_of(const audio::FrameMatrix& frames) {
  audio::MelSpectrogram mel;
  mel.frames = frames;
  return mel;
}

}  // namespace

TEST_CASE("encode is deterministic, unit-norm, and handles T=1") {
  SpeakerEncoder enc(tiny_config(), 7);
  const auto frames = testutil::make_mel_utterance(testutil::speaker_profile(0), 40, 3);
  const auto a = enc.encode(mel_of(frames));
  const auto b = enc.encode(mel_of(frames));
  CHECK(a.vec == b.vec);
  CHECK(a.vec.size() == 256);
  CHECK(std::abs(a.norm() - 1.0) < 1e-5);

  const auto single = enc.encode(mel_of(frames.topRows(1)));
  CHECK(std::abs(single.norm() - 1.0) < 1e-5);

  audio::FrameMatrix bad = frames;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS((void)enc.encode(mel_of(bad)), DataError);
}

TEST_CASE("average embedding: singleton, equal inputs, orthogonal pair") {
  SpeakerEncoder enc(tiny_config(), 9);
  const auto u1 = testutil::make_mel_utterance(testutil::speaker_profile(1), 32, 4);
  const auto u2 = testutil::make_mel_utterance(testutil::speaker_profile(2), 32, 5);

  const auto single = enc.average_embedding({mel_of(u1)});
  CHECK((single.vec - enc.encode(mel_of(u1)).vec).norm() < 1e-12);

  const auto twice = enc.average_embedding({mel_of(u1), mel_of(u1)});
  CHECK((twice.vec - enc.encode(mel_of(u1)).vec).norm() < 1e-12);

  // Orthogonal unit vectors average to (e1+e2)/||e1+e2||; verified directly
  // on the vector arithmetic the encoder applies.
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(256), e2 = Eigen::VectorXd::Zero(256);
  e1(0) = 1.0;
  e2(1) = 1.0;
  const Eigen::VectorXd mean = 0.5 * (e1 + e2);
  const Eigen::VectorXd expect = mean / mean.norm();
  CHECK(std::abs(expect.norm() - 1.0) < 1e-12);
  CHECK(expect(0) == doctest::Approx(1.0 / std::sqrt(2.0)));

  CHECK_THROWS_AS((void)enc.average_embedding({}), ConfigError);
}

TEST_CASE("ge2e toy values: orthogonal speakers vs collapsed speakers") {
  // Two speakers, two utterances each; each speaker's utterances share one
  // embedding and the two speakers are orthogonal. With w=10, b=-5 every
  // own-speaker score is 5 and every cross score is -5, so each of the four
  // utterances contributes log(1 + exp(-10)).
  const int dim = 8;
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(dim), e2 = Eigen::VectorXd::Zero(dim);
  e1(0) = 1.0;
  e2(1) = 1.0;
  const double loss = speaker::ge2e_loss_value({{e1, e1}, {e2, e2}}, 10.0, -5.0);
  const double expected = 4.0 * std::log(1.0 + std::exp(-10.0));
  CHECK(loss == doctest::Approx(expected).epsilon(1e-12));

  // Collapsing every speaker onto one embedding is strictly worse.
  const double collapsed = speaker::ge2e_loss_value({{e1, e1}, {e1, e1}}, 10.0, -5.0);
  CHECK(collapsed == doctest::Approx(4.0 * std::log(2.0)));
  CHECK(collapsed > loss);
}

TEST_CASE("ge2e is invariant to utterance permutation and speaker relabeling") {
  Rng rng(21);
  const int n = 3, m = 4, dim = 16;
  std::vector<std::vector<Eigen::VectorXd>> batch(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd v(dim);
      for (int d = 0; d < dim; ++d) v(d) = rng.normal();
      batch[static_cast<size_t>(j)].push_back(v.normalized());
    }
  const double base = speaker::ge2e_loss_value(batch, 8.0, -4.0);

  auto permuted = batch;
  std::swap(permuted[0][0], permuted[0][3]);
  std::swap(permuted[2][1], permuted[2][2]);
  CHECK(speaker::ge2e_loss_value(permuted, 8.0, -4.0) == doctest::Approx(base).epsilon(1e-12));

  auto relabeled = batch;
  std::swap(relabeled[0], relabeled[2]);
  CHECK(speaker::ge2e_loss_value(relabeled, 8.0, -4.0) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("ge2e graph value matches the plain formula and rejects tiny batches") {
  Rng rng(23);
  const int n = 2, m = 3, dim = 12;
  std::vector<std::vector<nn::Var>> vars(n);
  std::vector<std::vector<Eigen::VectorXd>> plain(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd v(dim);
      for (int d = 0; d < dim; ++d) v(d) = rng.normal();
      v.normalize();
      plain[static_cast<size_t>(j)].push_back(v);
      nn::Tensor t({dim});
      std::copy(v.data(), v.data() + dim, t.data());
      vars[static_cast<size_t>(j)].push_back(nn::Var::constant(t));
    }
  const nn::Var w = nn::Var::constant(nn::Tensor::scalar(10.0));
  const nn::Var b = nn::Var::constant(nn::Tensor::scalar(-5.0));
  const double graph = speaker::ge2e_loss(vars, w, b).scalar_value();
  const double value = speaker::ge2e_loss_value(plain, 10.0, -5.0);
  CHECK(graph == doctest::Approx(value).epsilon(1e-12));

  CHECK_THROWS_AS((void)speaker::ge2e_loss_value({{plain[0][0], plain[0][1]}}, 10.0, -5.0),
                  ConfigError);
}

TEST_CASE("ge2e gradcheck on a 2x2 batch") {
  Rng rng(29);
  const int dim = 8;
  std::vector<std::vector<nn::Var>> batch(2);
  std::vector<nn::Var> leaves;
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) {
      nn::Tensor t = nn::Tensor::normal({dim}, 1.0, rng);
      t.array() /= std::sqrt(t.array().square().sum());
      nn::Var v = nn::Var::leaf(t, true);
      batch[static_cast<size_t>(j)].push_back(v);
      leaves.push_back(v);
    }
  nn::Var w = nn::Var::leaf(nn::Tensor::scalar(10.0), true);
  nn::Var b = nn::Var::leaf(nn::Tensor::scalar(-5.0), true);
  leaves.push_back(w);
  leaves.push_back(b);
  auto loss_fn = [&]() { return speaker::ge2e_loss(batch, w, b); };
  const auto report = testutil::check_gradients(loss_fn, leaves, 8, rng);
  CHECK(report.max_rel_err < 1e-3);
}

TEST_CASE("toy encoder training reduces the ge2e loss; zero epochs is a no-op") {
  const auto dataset = testutil::make_encoder_dataset(8, 4, 48, 77);
  speaker::EncoderTrainConfig cfg;
  cfg.speakers_per_batch = 4;
  cfg.utts_per_speaker = 3;
  cfg.crop_frames = 24;
  cfg.epochs = 1;
  cfg.steps_per_epoch = 60;
  cfg.lr_start = 2e-3;
  cfg.lr_final = 1e-3;
  cfg.seed = 11;

  EncoderConfig ecfg;
  ecfg.hidden = 24;
  ecfg.layers = 2;
  SpeakerEncoder enc(ecfg, 13);

  // Zero total epochs leaves the parameters untouched.
  SpeakerEncoder frozen(ecfg, 13);
  speaker::EncoderTrainConfig none = cfg;
  none.epochs = 0;
  (void)train_speaker_encoder(frozen, dataset, none);
  for (size_t i = 0; i < frozen.params().items().size(); ++i)
    CHECK((frozen.params().items()[i].second.value().array() ==
           enc.params().items()[i].second.value().array())
              .all());

  const auto stats = train_speaker_encoder(enc, dataset, cfg);
  REQUIRE(stats.losses.size() == 60);
  const double first = stats.losses.front();
  double last_window = 0.0;
  for (size_t i = stats.losses.size() - 10; i < stats.losses.size(); ++i)
    last_window += stats.losses[i] / 10.0;
  CHECK(last_window < 0.9 * first);
  CHECK(stats.scale_w > 0.0);

  // Insufficient speakers for a batch is a dataset error.
  const auto small = testutil::make_encoder_dataset(2, 4, 48, 78);
  speaker::EncoderTrainConfig big_batch = cfg;
  big_batch.speakers_per_batch = 8;
  SpeakerEncoder enc2(ecfg, 14);
  CHECK_THROWS_AS((void)train_speaker_encoder(enc2, small, big_batch), DataError);
}

TEST_CASE("encoder checkpoints refuse architecture mismatch") {
  testutil::TempDir tmp("enc-ckpt");
  SpeakerEncoder enc(tiny_config(), 3);
  const auto path = tmp.path() / "encoder.ckpt";
  enc.save(path, R"({"seed":3})");

  SpeakerEncoder loaded = SpeakerEncoder::load(path);
  const auto frames = testutil::make_mel_utterance(testutil::speaker_profile(0), 24, 6);
  CHECK(loaded.encode(mel_of(frames)).vec == enc.encode(mel_of(frames)).vec);

  EncoderConfig other = tiny_config();
  other.hidden = 48;
  SpeakerEncoder wrong(other, 4);
  CHECK_THROWS_AS(wrong.load_weights(path), ConfigError);
}

TEST_CASE("embedding store caches, persists, and round-trips") {
  testutil::TempDir tmp("store");
  speaker::EmbeddingStore store(tmp.path() / "embeddings");

  Rng rng(31);
  Eigen::VectorXd v(256);
  for (int i = 0; i < 256; ++i) v(i) = rng.normal();
  v.normalize();

  int computed = 0;
  auto compute = [&]() {
    ++computed;
    speaker::SpeakerEmbedding e;
    e.vec = v;
    return e;
  };

  const auto a = store.get_or_compute("alice", compute);
  CHECK(computed == 1);
  CHECK(store.compute_count() == 1);

  // Second call is a pure cache hit.
  const auto b = store.get_or_compute("alice", compute);
  CHECK(computed == 1);
  CHECK(store.compute_count() == 1);
  CHECK(a.vec == b.vec);

  // A fresh store instance reads the same record back from disk at float32
  // fidelity.
  speaker::EmbeddingStore reopened(tmp.path() / "embeddings");
  const auto c = reopened.get_or_compute("alice", compute);
  CHECK(computed == 1);
  CHECK((c.vec - v).cwiseAbs().maxCoeff() < 1e-6);

  // Unknown speaker computes and persists.
  (void)reopened.get_or_compute("bob", compute);
  CHECK(computed == 2);
  const auto ids = reopened.speaker_ids();
  CHECK(ids == std::vector<std::string>{"alice", "bob"});

  reopened.export_packed(tmp.path() / "bulk.bin");
  CHECK(std::filesystem::file_size(tmp.path() / "bulk.bin") > 2u * 256u * 4u);
}
