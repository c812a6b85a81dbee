// zsvc/audio/stft.cpp

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

#include "zsvc/audio/stft.h"

#include <unsupported/Eigen/FFT>

#include <cmath>

#include "zsvc/common/error.h"

namespace zsvc::audio {

std::vector<double> hann_window(int length) {
  std::vector<double> w(static_cast<size_t>(length));
  for (int n = 0; n < length; ++n)
    w[static_cast<size_t>(n)] = 0.5 * (1.0 - std::cos(2.0 * M_PI * n / length));
  return w;
}

namespace {

// Reflection indexing that keeps bouncing for signals shorter than the pad.
double sample_reflect(const std::vector<double>& x, int64_t i) {
  const int64_t n = static_cast<int64_t>(x.size());
  if (n == 1) return x[0];
  const int64_t period = 2 * (n - 1);
  int64_t j = ((i % period) + period) % period;
  if (j >= n) j = period - j;
  return x[static_cast<size_t>(j)];
}

}  // namespace

Eigen::MatrixXcd stft(const std::vector<double>& samples, const StftConfig& cfg) {
  ZSVC_CHECK(!samples.empty(), DataError, "stft: empty signal");
  ZSVC_CHECK(cfg.win_length <= cfg.fft_size, ConfigError,
             "stft: window longer than FFT size");
  const int64_t frames = cfg.num_frames(static_cast<int64_t>(samples.size()));
  const int bins = cfg.num_bins();
  const std::vector<double> window = hann_window(cfg.win_length);
  const int64_t half = cfg.win_length / 2;

  Eigen::MatrixXcd out(frames, bins);
  Eigen::FFT<double> fft;
  std::vector<double> frame(static_cast<size_t>(cfg.fft_size), 0.0);
  std::vector<std::complex<double>> spectrum;
  for (int64_t t = 0; t < frames; ++t) {
    const int64_t start = t * cfg.hop - half;
    for (int n = 0; n < cfg.win_length; ++n)
      frame[static_cast<size_t>(n)] =
          sample_reflect(samples, start + n) * window[static_cast<size_t>(n)];
    fft.fwd(spectrum, frame);
    for (int b = 0; b < bins; ++b) out(t, b) = spectrum[static_cast<size_t>(b)];
  }
  return out;
}

std::vector<double> istft(const Eigen::MatrixXcd& spec, const StftConfig& cfg,
                          int64_t out_len) {
  ZSVC_CHECK(spec.rows() >= 1, DataError, "istft: empty spectrogram");
  ZSVC_CHECK(spec.cols() == cfg.num_bins(), ConfigError,
             "istft: bin count does not match config");
  const int64_t frames = spec.rows();
  const std::vector<double> window = hann_window(cfg.win_length);
  const int64_t half = cfg.win_length / 2;
  const int64_t buf_len = (frames - 1) * cfg.hop + cfg.win_length;

  std::vector<double> acc(static_cast<size_t>(buf_len), 0.0);
  std::vector<double> wsum(static_cast<size_t>(buf_len), 0.0);

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> full(static_cast<size_t>(cfg.fft_size));
  std::vector<double> frame;
  for (int64_t t = 0; t < frames; ++t) {
    for (int b = 0; b < cfg.num_bins(); ++b) full[static_cast<size_t>(b)] = spec(t, b);
    for (int b = cfg.num_bins(); b < cfg.fft_size; ++b)
      full[static_cast<size_t>(b)] = std::conj(spec(t, cfg.fft_size - b));
    fft.inv(frame, full);
    const int64_t offset = t * cfg.hop;  // buffer position of window start
    for (int n = 0; n < cfg.win_length; ++n) {
      const double w = window[static_cast<size_t>(n)];
      acc[static_cast<size_t>(offset + n)] += frame[static_cast<size_t>(n)] * w;
      wsum[static_cast<size_t>(offset + n)] += w * w;
    }
  }

  // The analysis frames are centered at t*hop, so signal sample i lives at
  // buffer position i + half.
  std::vector<double> out(static_cast<size_t>(out_len), 0.0);
  for (int64_t i = 0; i < out_len; ++i) {
    const int64_t j = i + half;
    if (j < buf_len && wsum[static_cast<size_t>(j)] > 1e-9)
      out[static_cast<size_t>(i)] =
          acc[static_cast<size_t>(j)] / wsum[static_cast<size_t>(j)];
  }
  return out;
}

}  // namespace zsvc::audio
