// zsvc/audio/stft.h

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

#ifndef ZSVC_AUDIO_STFT_H_
#define ZSVC_AUDIO_STFT_H_

#include <Eigen/Core>
#include <complex>
#include <vector>

namespace zsvc::audio {

struct StftConfig {
  int win_length = 1024;
  int fft_size = 1024;
  int hop = 256;

  int num_bins() const { return fft_size / 2 + 1; }
  // Center-padded framing: frame t is centered at sample t*hop, so a signal
  // of n samples yields ceil(n / hop) frames.
  int64_t num_frames(int64_t n_samples) const {
    return (n_samples + hop - 1) / hop;
  }
};

// Rows = frames, cols = fft_size/2 + 1 bins. Center-padded with reflection,
// periodic Hann window.
Eigen::MatrixXcd stft(const std::vector<double>& samples, const StftConfig& cfg = {});

// Weighted overlap-add inverse; output trimmed/zero-padded to out_len
// (pass frames*hop for the natural length).
std::vector<double> istft(const Eigen::MatrixXcd& spec, const StftConfig& cfg,
                          int64_t out_len);

std::vector<double> hann_window(int length);

}  // namespace zsvc::audio

#endif  // ZSVC_AUDIO_STFT_H_
