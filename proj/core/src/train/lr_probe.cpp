// zsvc/train/lr_probe.cpp

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

#include "zsvc/train/lr_probe.h"

#include <cmath>

#include "zsvc/common/error.h"

namespace zsvc::train {

double lr_range_probe(const ProbeClient& client, const std::vector<double>& grid,
                      int budget_steps) {
  ZSVC_CHECK(!grid.empty(), ConfigError, "lr grid is empty");
  ZSVC_CHECK(budget_steps >= 1, ConfigError, "probe budget must be >= 1");
  if (grid.size() == 1) return grid[0];

  const int window = std::max(1, budget_steps / 10);
  double best_lr = 0.0;
  double best_decrease = -std::numeric_limits<double>::infinity();
  bool any_finite = false;

  for (double lr : grid) {
    auto trial = client.clone();
    double first = 0.0, last = 0.0;
    bool diverged = false;
    for (int s = 0; s < budget_steps; ++s) {
      double loss;
      try {
        loss = trial->step(lr);
      } catch (const Error&) {
        diverged = true;
        break;
      }
      if (!std::isfinite(loss)) {
        diverged = true;
        break;
      }
      // The loss reported at step 0 predates any update, so it is common to
      // every candidate; the decrease is measured from there to the final
      // window.
      if (s == 0) first = loss;
      if (s >= budget_steps - window) last += loss / window;
    }
    if (diverged) continue;
    any_finite = true;
    const double decrease = first - last;
    if (decrease > best_decrease) {
      best_decrease = decrease;
      best_lr = lr;
    }
  }
  ZSVC_CHECK(any_finite, ConfigError,
             "every candidate learning rate diverged; try a grid of smaller rates");
  return best_lr;
}

}  // namespace zsvc::train
