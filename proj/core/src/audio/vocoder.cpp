// zsvc/audio/vocoder.cpp

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

#include "zsvc/audio/vocoder.h"

#include <Eigen/SVD>
#include <cmath>
#include <complex>

#include "zsvc/common/error.h"
#include "zsvc/common/rng.h"

namespace zsvc::audio {

namespace {

// Moore-Penrose pseudo-inverse of the mel filterbank; negative leakage is
// clamped after application.
Eigen::MatrixXd filterbank_pinv(const Eigen::MatrixXd& fb) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(fb, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv(0) * 1e-10;
  Eigen::VectorXd inv_sv(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    inv_sv(i) = sv(i) > cutoff ? 1.0 / sv(i) : 0.0;
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace

Waveform reconstruct_waveform(const MelSpectrogram& mel, int iterations,
                              uint64_t seed, const MelConfig& cfg) {
  ZSVC_CHECK(iterations >= 1, ConfigError,
             "phase reconstruction needs at least 1 iteration");
  ZSVC_CHECK(mel.num_frames() >= 1, DataError, "empty spectrogram");
  ZSVC_CHECK(mel.frames.cols() == cfg.num_mels, ConfigError,
             "spectrogram bin count does not match vocoder config");

  const Eigen::MatrixXd fb = mel_filterbank(cfg);
  const Eigen::MatrixXd pinv = filterbank_pinv(fb);

  // Undo the log, invert the filterbank to linear magnitudes.
  const Eigen::MatrixXd mel_mag = mel.frames.array().exp().matrix();
  Eigen::MatrixXd mag = (mel_mag * pinv.transpose()).cwiseMax(0.0);

  const int64_t frames = mag.rows();
  const int bins = cfg.stft.num_bins();
  const int64_t out_len = frames * cfg.stft.hop;

  zsvc::Rng rng(zsvc::derive_seed(seed, "griffin-lim-phase"));
  Eigen::MatrixXcd spec(frames, bins);
  for (int64_t t = 0; t < frames; ++t)
    for (int b = 0; b < bins; ++b) {
      const double phi = rng.uniform(-M_PI, M_PI);
      spec(t, b) = std::polar(mag(t, b), phi);
    }

  std::vector<double> wave;
  for (int it = 0; it < iterations; ++it) {
    wave = istft(spec, cfg.stft, out_len);
    const Eigen::MatrixXcd est = stft(wave, cfg.stft);
    for (int64_t t = 0; t < frames; ++t)
      for (int b = 0; b < bins; ++b) {
        const double a = std::abs(est(t, b));
        spec(t, b) = a > 1e-12 ? est(t, b) / a * mag(t, b)
                               : std::complex<double>(mag(t, b), 0.0);
      }
  }
  wave = istft(spec, cfg.stft, out_len);

  Waveform out;
  out.sample_rate = cfg.sample_rate;
  out.samples = std::move(wave);
  return out;
}

}  // namespace zsvc::audio
