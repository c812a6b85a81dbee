// zsvc/audio/resample.cpp

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

#include "zsvc/audio/resample.h"

#include <algorithm>
#include <cmath>

#include "zsvc/common/error.h"

namespace zsvc::audio {

namespace {

constexpr int kHalfTaps = 32;  // kernel half-width, in output-rate samples

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

}  // namespace

std::vector<double> resample(const std::vector<double>& in, int src_rate,
                             int dst_rate) {
  ZSVC_CHECK(src_rate > 0 && dst_rate > 0, ConfigError, "sample rates must be positive");
  if (src_rate == dst_rate || in.empty()) return in;

  const double ratio = static_cast<double>(dst_rate) / src_rate;
  const int64_t n_in = static_cast<int64_t>(in.size());
  const int64_t n_out = std::max<int64_t>(
      1, static_cast<int64_t>(std::llround(static_cast<double>(n_in) * ratio)));

  // Low-pass cutoff at the narrower Nyquist; when downsampling the kernel is
  // stretched by 1/ratio and gains amplitude normalization fc.
  const double fc = std::min(1.0, ratio);
  const double half_width = kHalfTaps / fc;

  std::vector<double> out(static_cast<size_t>(n_out));
  for (int64_t i = 0; i < n_out; ++i) {
    const double center = static_cast<double>(i) / ratio;
    const int64_t lo = std::max<int64_t>(0, static_cast<int64_t>(std::ceil(center - half_width)));
    const int64_t hi = std::min<int64_t>(n_in - 1, static_cast<int64_t>(std::floor(center + half_width)));
    double acc = 0.0;
    for (int64_t j = lo; j <= hi; ++j) {
      const double u = static_cast<double>(j) - center;
      const double window = 0.5 * (1.0 + std::cos(M_PI * u / half_width));
      acc += in[static_cast<size_t>(j)] * fc * sinc(fc * u) * window;
    }
    out[static_cast<size_t>(i)] = acc;
  }
  return out;
}

}  // namespace zsvc::audio
