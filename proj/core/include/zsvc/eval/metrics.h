// zsvc/eval/metrics.h

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

#ifndef ZSVC_EVAL_METRICS_H_
#define ZSVC_EVAL_METRICS_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "zsvc/eval/dtw.h"
#include "zsvc/gan/generator.h"
#include "zsvc/speaker/encoder.h"

namespace zsvc::eval {

struct AlignedMetrics {
  double mae = 0.0;       // per-entry mean absolute difference
  double mse = 0.0;       // per-entry mean squared difference
  double cos_theta = 0.0; // mean per-frame cosine similarity (1 = identical direction)
  int64_t frames_evaluated = 0;
};

// Metrics over path pairs whose *target* frame is non-silent. The path is
// computed over full sequences; masking filters pairs afterwards. Raises an
// evaluation error when no non-silent target frame lies on the path.
AlignedMetrics aligned_metrics(const audio::FrameMatrix& converted,
                               const audio::FrameMatrix& target,
                               const AlignmentPath& path,
                               const audio::SilenceMask& target_mask);

// || E(converted) - E(target) ||_2 over unit embeddings; in [0, 2], lower
// means closer speaker identity.
double speaker_similarity(const speaker::SpeakerEncoder& encoder,
                          const audio::MelSpectrogram& converted,
                          const audio::MelSpectrogram& target);

struct CyclicEvalResult {
  AlignedMetrics metrics;
  double e_norm = 0.0;
  audio::FrameMatrix reconstruction;
};

// Maps source -> target -> source and scores the reconstruction against the
// original (alignment and silence mask taken from the source as the
// comparison target).
CyclicEvalResult cyclic_reconstruction_eval(const gan::Generator& generator,
                                            const speaker::SpeakerEncoder& encoder,
                                            const audio::FrameMatrix& source,
                                            const gan::ConditioningPair& pair);

struct PairMetrics {
  std::string source_id;
  std::string target_id;
  double mae = 0.0;
  double mse = 0.0;
  double cos_theta = 0.0;
  double e_norm = 0.0;
  int64_t frames_evaluated = 0;
};

struct MetricsReport {
  std::vector<PairMetrics> pairs;                    // sorted by (source, target)
  std::optional<std::vector<PairMetrics>> reconstruction;
  uint64_t seed = 0;
  std::string config_hash;
  std::string setting;  // e.g. seen-to-seen

  PairMetrics aggregate() const;                      // arithmetic mean per metric
  std::optional<PairMetrics> reconstruction_aggregate() const;
  std::string to_json() const;
  // MAE, MSE, cos(theta), e_norm, speed column layout.
  std::string to_csv(std::optional<double> speed_ms_per_s = std::nullopt) const;
  void save(const std::filesystem::path& json_path) const;
};

}  // namespace zsvc::eval

#endif  // ZSVC_EVAL_METRICS_H_
