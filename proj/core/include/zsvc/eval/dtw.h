// zsvc/eval/dtw.h

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

#ifndef ZSVC_EVAL_DTW_H_
#define ZSVC_EVAL_DTW_H_

#include <utility>
#include <vector>

#include "zsvc/audio/mel.h"

namespace zsvc::eval {

// Monotone alignment between two frame sequences. pairs[k] = (i, j) maps
// frame i of the first sequence to frame j of the second; the path starts at
// (0,0), ends at (Tc-1, Tt-1), and every consecutive step is one of
// (1,0), (0,1), (1,1).
struct AlignmentPath {
  std::vector<std::pair<int64_t, int64_t>> pairs;
  double cost = 0.0;

  bool valid_for(int64_t len_a, int64_t len_b) const;
};

// Minimal-cost alignment under per-frame Euclidean distance with uniform
// step weights; cost ties during backtracking prefer the diagonal step.
AlignmentPath dtw_align(const audio::FrameMatrix& converted,
                        const audio::FrameMatrix& target);

}  // namespace zsvc::eval

#endif  // ZSVC_EVAL_DTW_H_
