// zsvc/eval/metrics.cpp

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

#include "zsvc/eval/metrics.h"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "zsvc/common/error.h"

namespace zsvc::eval {

AlignedMetrics aligned_metrics(const audio::FrameMatrix& converted,
                               const audio::FrameMatrix& target,
                               const AlignmentPath& path,
                               const audio::SilenceMask& target_mask) {
  ZSVC_CHECK(static_cast<int64_t>(target_mask.nonsilent.size()) == target.rows(),
             DataError, "silence mask length does not match the target");
  ZSVC_CHECK(path.valid_for(converted.rows(), target.rows()), DataError,
             "alignment path does not fit the sequences");

  const int64_t bins = target.cols();
  double abs_acc = 0.0, sq_acc = 0.0, cos_acc = 0.0;
  int64_t used = 0;
  for (const auto& [i, j] : path.pairs) {
    if (!target_mask.nonsilent[static_cast<size_t>(j)]) continue;
    const auto a = converted.row(i);
    const auto b = target.row(j);
    abs_acc += (a - b).cwiseAbs().sum();
    sq_acc += (a - b).squaredNorm();
    cos_acc += a.dot(b) / (a.norm() * b.norm());
    ++used;
  }
  ZSVC_CHECK(used >= 1, DataError,
             "no non-silent target frames on the alignment path; metrics undefined");

  AlignedMetrics out;
  out.frames_evaluated = used;
  out.mae = abs_acc / static_cast<double>(used * bins);
  out.mse = sq_acc / static_cast<double>(used * bins);
  out.cos_theta = cos_acc / static_cast<double>(used);
  return out;
}

double speaker_similarity(const speaker::SpeakerEncoder& encoder,
                          const audio::MelSpectrogram& converted,
                          const audio::MelSpectrogram& target) {
  return (encoder.encode(converted).vec - encoder.encode(target).vec).norm();
}

CyclicEvalResult cyclic_reconstruction_eval(const gan::Generator& generator,
                                            const speaker::SpeakerEncoder& encoder,
                                            const audio::FrameMatrix& source,
                                            const gan::ConditioningPair& pair) {
  const audio::FrameMatrix there = generator.generate_padded(source, pair);
  const gan::ConditioningPair reverse{pair.target, pair.source};
  CyclicEvalResult result;
  result.reconstruction = generator.generate_padded(there, reverse);

  audio::MelSpectrogram source_mel;
  source_mel.frames = source;
  audio::MelSpectrogram rec_mel;
  rec_mel.frames = result.reconstruction;

  const AlignmentPath path = dtw_align(result.reconstruction, source);
  result.metrics = aligned_metrics(result.reconstruction, source, path,
                                   audio::silence_mask(source_mel));
  result.e_norm = speaker_similarity(encoder, rec_mel, source_mel);
  return result;
}

namespace {

PairMetrics mean_of(const std::vector<PairMetrics>& rows) {
  PairMetrics agg;
  agg.source_id = "mean";
  agg.target_id = "mean";
  if (rows.empty()) return agg;
  for (const auto& r : rows) {
    agg.mae += r.mae;
    agg.mse += r.mse;
    agg.cos_theta += r.cos_theta;
    agg.e_norm += r.e_norm;
    agg.frames_evaluated += r.frames_evaluated;
  }
  const auto n = static_cast<double>(rows.size());
  agg.mae /= n;
  agg.mse /= n;
  agg.cos_theta /= n;
  agg.e_norm /= n;
  return agg;
}

nlohmann::json row_to_json(const PairMetrics& r) {
  return {{"source", r.source_id},   {"target", r.target_id},
          {"mae", r.mae},            {"mse", r.mse},
          {"cos_theta", r.cos_theta}, {"e_norm", r.e_norm},
          {"frames_evaluated", r.frames_evaluated}};
}

}  // namespace

PairMetrics MetricsReport::aggregate() const { return mean_of(pairs); }

std::optional<PairMetrics> MetricsReport::reconstruction_aggregate() const {
  if (!reconstruction) return std::nullopt;
  return mean_of(*reconstruction);
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["setting"] = setting;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["pairs"] = nlohmann::json::array();
  for (const auto& r : pairs) j["pairs"].push_back(row_to_json(r));
  j["aggregate"] = row_to_json(aggregate());
  if (reconstruction) {
    j["reconstruction_pairs"] = nlohmann::json::array();
    for (const auto& r : *reconstruction)
      j["reconstruction_pairs"].push_back(row_to_json(r));
    j["reconstruction_aggregate"] = row_to_json(mean_of(*reconstruction));
  }
  return j.dump(2);
}

std::string MetricsReport::to_csv(std::optional<double> speed_ms_per_s) const {
  std::ostringstream out;
  out << "source,target,mae,mse,cos_theta,e_norm,speed_ms_per_s\n";
  auto emit = [&](const PairMetrics& r) {
    out << r.source_id << ',' << r.target_id << ',' << r.mae << ',' << r.mse
        << ',' << r.cos_theta << ',' << r.e_norm << ',';
    if (speed_ms_per_s) out << *speed_ms_per_s;
    out << '\n';
  };
  for (const auto& r : pairs) emit(r);
  emit(aggregate());
  return out.str();
}

void MetricsReport::save(const std::filesystem::path& json_path) const {
  std::ofstream out(json_path, std::ios::trunc);
  ZSVC_CHECK(out.good(), DataError, "cannot write report: " + json_path.string());
  out << to_json() << "\n";
}

}  // namespace zsvc::eval
