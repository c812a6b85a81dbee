// zsvc/audio/wav.h

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

#ifndef ZSVC_AUDIO_WAV_H_
#define ZSVC_AUDIO_WAV_H_

#include <filesystem>
#include <vector>

namespace zsvc::audio {

inline constexpr int kTargetSampleRate = 22050;

struct Waveform {
  std::vector<double> samples;  // mono, nominally in [-1, 1]
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Decodes a RIFF/WAVE file (16/24/32-bit PCM or float32, plain or
// extensible). Multi-channel input is averaged to mono. Sample rate is
// whatever the file declares.
Waveform read_wav(const std::filesystem::path& path);

// read_wav + resample to 22.05 kHz. A file already at the target rate is
// passed through untouched.
Waveform load_waveform(const std::filesystem::path& path);

// Writes 16-bit PCM; samples are clamped to [-1, 1].
void write_wav(const std::filesystem::path& path, const Waveform& wave);

}  // namespace zsvc::audio

#endif  // ZSVC_AUDIO_WAV_H_
