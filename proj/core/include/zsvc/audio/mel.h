// zsvc/audio/mel.h

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

#ifndef ZSVC_AUDIO_MEL_H_
#define ZSVC_AUDIO_MEL_H_

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "zsvc/audio/stft.h"
#include "zsvc/audio/wav.h"

namespace zsvc::audio {

using FrameMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kMelBins = 80;
// Magnitudes are clamped at 1e-5 before the natural log, so every
// spectrogram value is >= ln(1e-5) ~= -11.513. The -10 silence threshold
// sits between this floor and speech energy.
inline constexpr double kLogFloorMagnitude = 1e-5;
inline constexpr double kSilenceThreshold = -10.0;

struct MelConfig {
  StftConfig stft;
  int sample_rate = kTargetSampleRate;
  int num_mels = kMelBins;
  double fmin_hz = 0.0;
  double fmax_hz = kTargetSampleRate / 2.0;
};

struct MelSpectrogram {
  FrameMatrix frames;  // T x 80, natural-log mel magnitudes
  double frame_rate = static_cast<double>(kTargetSampleRate) / 256.0;
  std::string source_id;
  std::string speaker_id;

  int64_t num_frames() const { return frames.rows(); }
  bool all_finite() const { return frames.allFinite(); }
};

struct SilenceMask {
  std::vector<bool> nonsilent;  // true = non-silent, length T
};

// 80 triangular, area-normalized filters from fmin to fmax; rows = mel bands,
// cols = FFT bins.
Eigen::MatrixXd mel_filterbank(const MelConfig& cfg = {});

// Magnitude STFT -> mel filterbank -> clamp at 1e-5 -> natural log.
// T = ceil(samples / hop) under the center-padded framing.
MelSpectrogram mel_spectrogram(const Waveform& wave, const MelConfig& cfg = {});

// A frame is non-silent when its mean over the 80 bins is strictly greater
// than -10.
SilenceMask silence_mask(const MelSpectrogram& mel);

// Repeats the final frame until T is a multiple of `multiple`. Returns the
// input unchanged when already aligned.
FrameMatrix pad_frames_to_multiple(const FrameMatrix& frames, int64_t multiple);
FrameMatrix trim_frames(const FrameMatrix& frames, int64_t num_frames);

// Binary tensor container (shape header + row-major float32 payload) with a
// JSON sidecar carrying speaker id, source path and frame count.
void save_mel(const std::filesystem::path& path, const MelSpectrogram& mel);
MelSpectrogram load_mel(const std::filesystem::path& path);

}  // namespace zsvc::audio

#endif  // ZSVC_AUDIO_MEL_H_
