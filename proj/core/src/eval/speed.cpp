// zsvc/eval/speed.cpp

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

#include "zsvc/eval/speed.h"

#include <algorithm>
#include <chrono>

#include "zsvc/common/error.h"

namespace zsvc::eval {

SpeedResult speed_benchmark(const std::function<void()>& stage,
                            double audio_seconds, int warmup, int runs) {
  ZSVC_CHECK(audio_seconds > 0.0, ConfigError, "audio duration must be positive");
  ZSVC_CHECK(warmup >= 2 && runs >= 5, ConfigError,
             "speed benchmark needs >= 2 warm-up and >= 5 timed runs");
  for (int i = 0; i < warmup; ++i) stage();

  SpeedResult result;
  result.audio_seconds = audio_seconds;
  result.run_ms.reserve(static_cast<size_t>(runs));
  for (int i = 0; i < runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    stage();
    const auto t1 = std::chrono::steady_clock::now();
    result.run_ms.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::vector<double> sorted = result.run_ms;
  std::sort(sorted.begin(), sorted.end());
  const size_t mid = sorted.size() / 2;
  result.median_ms = sorted.size() % 2 == 1
                         ? sorted[mid]
                         : 0.5 * (sorted[mid - 1] + sorted[mid]);
  result.ms_per_second = result.median_ms / audio_seconds;
  return result;
}

}  // namespace zsvc::eval
