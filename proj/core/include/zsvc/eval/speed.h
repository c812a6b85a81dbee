// zsvc/eval/speed.h

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

#ifndef ZSVC_EVAL_SPEED_H_
#define ZSVC_EVAL_SPEED_H_

#include <functional>
#include <vector>

namespace zsvc::eval {

struct SpeedResult {
  double ms_per_second = 0.0;  // median wall-clock ms per second of audio
  double median_ms = 0.0;
  std::vector<double> run_ms;
  double audio_seconds = 0.0;
};

// Median over `runs` timed invocations after `warmup` untimed ones.
SpeedResult speed_benchmark(const std::function<void()>& stage,
                            double audio_seconds, int warmup = 2, int runs = 5);

}  // namespace zsvc::eval

#endif  // ZSVC_EVAL_SPEED_H_
