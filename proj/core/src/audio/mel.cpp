// zsvc/audio/mel.cpp

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

#include "zsvc/audio/mel.h"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "zsvc/common/error.h"

namespace zsvc::audio {

namespace {

constexpr char kMelMagic[6] = {'Z', 'M', 'E', 'L', '1', '\n'};

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

Eigen::MatrixXd mel_filterbank(const MelConfig& cfg) {
  const int bins = cfg.stft.num_bins();
  const int n = cfg.num_mels;
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n, bins);

  const double mel_lo = hz_to_mel(cfg.fmin_hz);
  const double mel_hi = hz_to_mel(cfg.fmax_hz);
  std::vector<double> edges(static_cast<size_t>(n) + 2);
  for (int k = 0; k < n + 2; ++k)
    edges[static_cast<size_t>(k)] =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * k / (n + 1));

  for (int k = 0; k < n; ++k) {
    const double f_lo = edges[static_cast<size_t>(k)];
    const double f_center = edges[static_cast<size_t>(k) + 1];
    const double f_hi = edges[static_cast<size_t>(k) + 2];
    // Area normalization: triangle height 2 / (f_hi - f_lo).
    const double height = 2.0 / (f_hi - f_lo);
    for (int b = 0; b < bins; ++b) {
      const double f = static_cast<double>(b) * cfg.sample_rate / cfg.stft.fft_size;
      if (f <= f_lo || f >= f_hi) continue;
      const double w = f < f_center ? (f - f_lo) / (f_center - f_lo)
                                    : (f_hi - f) / (f_hi - f_center);
      fb(k, b) = w * height;
    }
  }
  return fb;
}

MelSpectrogram mel_spectrogram(const Waveform& wave, const MelConfig& cfg) {
  ZSVC_CHECK(!wave.samples.empty(), DataError, "mel_spectrogram: empty waveform");
  const Eigen::MatrixXcd spec = stft(wave.samples, cfg.stft);
  const Eigen::MatrixXd fb = mel_filterbank(cfg);

  MelSpectrogram mel;
  mel.frame_rate = static_cast<double>(cfg.sample_rate) / cfg.stft.hop;
  mel.frames = (spec.cwiseAbs() * fb.transpose())
                   .cwiseMax(kLogFloorMagnitude)
                   .array()
                   .log()
                   .matrix();
  return mel;
}

SilenceMask silence_mask(const MelSpectrogram& mel) {
  SilenceMask mask;
  mask.nonsilent.resize(static_cast<size_t>(mel.num_frames()));
  for (int64_t t = 0; t < mel.num_frames(); ++t)
    mask.nonsilent[static_cast<size_t>(t)] = mel.frames.row(t).mean() > kSilenceThreshold;
  return mask;
}

FrameMatrix pad_frames_to_multiple(const FrameMatrix& frames, int64_t multiple) {
  ZSVC_CHECK(multiple >= 1, ConfigError, "pad multiple must be >= 1");
  ZSVC_CHECK(frames.rows() >= 1, DataError, "cannot pad an empty spectrogram");
  const int64_t t = frames.rows();
  const int64_t target = ((t + multiple - 1) / multiple) * multiple;
  if (target == t) return frames;
  FrameMatrix out(target, frames.cols());
  out.topRows(t) = frames;
  for (int64_t i = t; i < target; ++i) out.row(i) = frames.row(t - 1);
  return out;
}

FrameMatrix trim_frames(const FrameMatrix& frames, int64_t num_frames) {
  ZSVC_CHECK(num_frames >= 1 && num_frames <= frames.rows(), ConfigError,
             "trim length out of range");
  return frames.topRows(num_frames);
}

void save_mel(const std::filesystem::path& path, const MelSpectrogram& mel) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  ZSVC_CHECK(out.good(), DataError, "cannot open for writing: " + path.string());
  out.write(kMelMagic, sizeof(kMelMagic));
  const uint32_t rows = static_cast<uint32_t>(mel.frames.rows());
  const uint32_t cols = static_cast<uint32_t>(mel.frames.cols());
  out.write(reinterpret_cast<const char*>(&rows), 4);
  out.write(reinterpret_cast<const char*>(&cols), 4);
  for (int64_t i = 0; i < mel.frames.size(); ++i) {
    const float v = static_cast<float>(mel.frames.data()[i]);
    out.write(reinterpret_cast<const char*>(&v), 4);
  }
  out.flush();
  ZSVC_CHECK(out.good(), DataError, "write failed: " + path.string());

  nlohmann::json side;
  side["speaker_id"] = mel.speaker_id;
  side["source"] = mel.source_id;
  side["num_frames"] = rows;
  side["num_bins"] = cols;
  side["frame_rate"] = mel.frame_rate;
  std::ofstream meta(path.string() + ".json", std::ios::trunc);
  ZSVC_CHECK(meta.good(), DataError, "cannot write sidecar for: " + path.string());
  meta << side.dump(2) << "\n";
}

MelSpectrogram load_mel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  ZSVC_CHECK(in.good(), DataError, "cannot open spectrogram: " + path.string());
  char magic[sizeof(kMelMagic)];
  in.read(magic, sizeof(magic));
  ZSVC_CHECK(in.good() && std::memcmp(magic, kMelMagic, sizeof(kMelMagic)) == 0,
             DataError, "not a mel container: " + path.string());
  uint32_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), 4);
  in.read(reinterpret_cast<char*>(&cols), 4);
  ZSVC_CHECK(in.good() && rows >= 1 && cols >= 1, DataError,
             "corrupt mel container: " + path.string());

  MelSpectrogram mel;
  mel.frames.resize(rows, cols);
  for (int64_t i = 0; i < mel.frames.size(); ++i) {
    float v;
    in.read(reinterpret_cast<char*>(&v), 4);
    ZSVC_CHECK(in.good(), DataError, "truncated mel container: " + path.string());
    mel.frames.data()[i] = static_cast<double>(v);
  }

  const std::filesystem::path sidecar = path.string() + ".json";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream meta(sidecar);
    try {
      nlohmann::json side = nlohmann::json::parse(meta);
      mel.speaker_id = side.value("speaker_id", "");
      mel.source_id = side.value("source", "");
      mel.frame_rate = side.value("frame_rate", mel.frame_rate);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("bad mel sidecar " + sidecar.string() + ": " + e.what());
    }
  }
  return mel;
}

}  // namespace zsvc::audio
