// zsvc/baseline/linear_model.cpp

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

#include "zsvc/baseline/linear_model.h"

#include <cmath>

#include "zsvc/gan/generator.h"
#include "zsvc/nn/optim.h"
#include "zsvc/nn/serialize.h"
#include "zsvc/train/lr_probe.h"
#include "zsvc/train/sampler.h"

namespace zsvc::baseline {

LinearBaseline::LinearBaseline(uint64_t seed) {
  Rng rng(derive_seed(seed, "linear-baseline-init"));
  c1_ = nn::Conv2d::create(params_, "c1", 1, 200, 5, 5, 1, 1, 2, 2, rng);
  c2_ = nn::Conv2d::create(params_, "c2", 200, 200, 5, 5, 1, 1, 2, 2, rng);
  c3_ = nn::Conv2d::create(params_, "c3", 200, 100, 3, 3, 1, 1, 1, 1, rng);
  c4_ = nn::Conv2d::create(params_, "c4", 100, 1, 3, 3, 1, 1, 1, 1, rng);
}

nn::Var LinearBaseline::forward(const nn::Var& x) const {
  return c4_.forward(c3_.forward(c2_.forward(c1_.forward(x))));
}

audio::FrameMatrix LinearBaseline::convert(const audio::FrameMatrix& mel) const {
  ZSVC_CHECK(mel.allFinite(), DataError, "non-finite values in baseline input");
  nn::NoGradGuard no_grad;
  nn::Var out = forward(nn::Var::constant(gan::frames_to_input(mel)));
  return gan::input_to_frames(out.value());
}

void LinearBaseline::save(const std::filesystem::path& path,
                          const std::string& meta_json) const {
  nn::NamedTensors bundle;
  bundle.kind = "linear-baseline";
  bundle.arch_json = R"({"layers":[[200,5],[200,5],[100,3],[1,3]]})";
  bundle.meta_json = meta_json.empty() ? "{}" : meta_json;
  nn::pack_params(params_, "", bundle);
  nn::save_named_tensors(path, bundle);
}

LinearBaseline LinearBaseline::load(const std::filesystem::path& path) {
  nn::NamedTensors bundle = nn::load_named_tensors(path);
  ZSVC_CHECK(bundle.kind == "linear-baseline", ConfigError,
             "checkpoint kind mismatch (wanted linear-baseline): " + path.string());
  LinearBaseline model(/*seed=*/0);
  nn::unpack_params(model.params_, "", bundle);
  return model;
}

namespace {

struct TrainLoop {
  LinearBaseline* model;
  const std::vector<ParallelPair>* pairs;
  const BaselineTrainConfig* cfg;
  nn::Adam opt;
  Rng rng;

  TrainLoop(LinearBaseline* m, const std::vector<ParallelPair>* p,
            const BaselineTrainConfig* c)
      : model(m), pairs(p), cfg(c), rng(derive_seed(c->seed, "baseline-training")) {}

  // One optimization step; returns the batch loss and the crop length used.
  std::pair<double, int> step(double lr) {
    nn::Var total = nn::Var::constant(nn::Tensor::scalar(0.0));
    int crop_len = 0;
    for (int bi = 0; bi < cfg->batch_size; ++bi) {
      const auto& pair =
          (*pairs)[static_cast<size_t>(rng.randint(0, static_cast<int64_t>(pairs->size()) - 1))];
      const int k = train::sample_crop_length(train::CropMode::kVariable, cfg->crops, rng);
      crop_len = k;
      // Source and target crops share a proportional offset; no further time
      // alignment is applied and residual mismatch is left to the
      // evaluation-side warping.
      const double phase = rng.uniform(0.0, 1.0);
      const audio::FrameMatrix src = crop_at_phase(pair.source, k, phase);
      const audio::FrameMatrix trg = crop_at_phase(pair.target, k, phase);
      nn::Var y = model->forward(nn::Var::constant(gan::frames_to_input(src)));
      nn::Var t = nn::Var::constant(gan::frames_to_input(trg));
      total = nn::add(total, nn::mean(nn::abs_(nn::sub(y, t))));
    }
    total = nn::mul_scalar(total, 1.0 / cfg->batch_size);
    const double loss = total.scalar_value();
    ZSVC_CHECK(std::isfinite(loss), DivergenceError, "non-finite baseline loss");
    model->params().zero_grad();
    nn::backward(total);
    opt.step(model->params(), lr);
    return {loss, crop_len};
  }

  static audio::FrameMatrix crop_at_phase(const audio::FrameMatrix& m, int k,
                                          double phase) {
    const int64_t t = m.rows();
    if (t < k) {
      const int64_t reps = (k + t - 1) / t;
      audio::FrameMatrix tiled(reps * t, m.cols());
      for (int64_t r = 0; r < reps; ++r) tiled.middleRows(r * t, t) = m;
      return tiled.topRows(k);
    }
    const auto start = std::min<int64_t>(
        static_cast<int64_t>(std::floor(phase * static_cast<double>(t - k + 1))), t - k);
    return m.middleRows(start, k);
  }
};

struct BaselineProbeClient : train::ProbeClient {
  const LinearBaseline* base_model;
  const std::vector<ParallelPair>* pairs;
  const BaselineTrainConfig* cfg;
  std::unique_ptr<LinearBaseline> model;
  std::unique_ptr<TrainLoop> loop;

  std::unique_ptr<train::ProbeClient> clone() const override {
    auto c = std::make_unique<BaselineProbeClient>();
    c->base_model = base_model;
    c->pairs = pairs;
    c->cfg = cfg;
    c->model = std::make_unique<LinearBaseline>(0);
    c->model->params().copy_values_from(base_model->params());
    c->loop = std::make_unique<TrainLoop>(c->model.get(), pairs, cfg);
    return c;
  }
  double step(double lr) override { return loop->step(lr).first; }
};

}  // namespace

BaselineTrainStats train_linear_baseline(LinearBaseline& model,
                                         const std::vector<ParallelPair>& pairs,
                                         const BaselineTrainConfig& cfg) {
  ZSVC_CHECK(!pairs.empty(), DataError, "baseline training needs parallel pairs");
  for (const auto& p : pairs)
    ZSVC_CHECK(p.source.rows() >= 1 && p.target.rows() >= 1 &&
                   p.source.cols() == p.target.cols(),
               DataError, "bad parallel pair shapes");

  BaselineTrainStats stats;
  double lr = cfg.lr;
  if (!cfg.lr_grid.empty()) {
    BaselineProbeClient client;
    client.base_model = &model;
    client.pairs = &pairs;
    client.cfg = &cfg;
    lr = train::lr_range_probe(client, cfg.lr_grid, cfg.lr_probe_steps);
  }
  stats.lr_used = lr;

  TrainLoop loop(&model, &pairs, &cfg);
  for (int64_t s = 0; s < cfg.steps; ++s) {
    auto [loss, crop_len] = loop.step(lr);
    stats.losses.push_back(loss);
    stats.crop_lengths.push_back(crop_len);
  }
  return stats;
}

}  // namespace zsvc::baseline
