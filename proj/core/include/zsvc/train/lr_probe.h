// zsvc/train/lr_probe.h

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

#ifndef ZSVC_TRAIN_LR_PROBE_H_
#define ZSVC_TRAIN_LR_PROBE_H_

#include <memory>
#include <vector>

namespace zsvc::train {

// A cloneable training objective for the learning-rate range procedure:
// train briefly at each candidate rate, keep the rate with the largest loss
// decrease.
class ProbeClient {
 public:
  virtual ~ProbeClient() = default;
  virtual std::unique_ptr<ProbeClient> clone() const = 0;
  // Runs one optimization step at the given rate and returns the loss
  // measured before the update.
  virtual double step(double lr) = 0;
};

// Runs `budget_steps` per candidate on a fresh clone each time (the passed
// client is never mutated) and returns the rate with the largest decrease
// between the first and last loss window. A single-entry grid short-circuits.
// Throws ConfigError when every candidate diverges.
double lr_range_probe(const ProbeClient& client, const std::vector<double>& grid,
                      int budget_steps);

}  // namespace zsvc::train

#endif  // ZSVC_TRAIN_LR_PROBE_H_
