// zsvc/eval/dtw.cpp

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

#include "zsvc/eval/dtw.h"

#include <algorithm>
#include <limits>

#include "zsvc/common/error.h"

namespace zsvc::eval {

bool AlignmentPath::valid_for(int64_t len_a, int64_t len_b) const {
  if (pairs.empty()) return false;
  if (pairs.front() != std::pair<int64_t, int64_t>(0, 0)) return false;
  if (pairs.back() != std::pair<int64_t, int64_t>(len_a - 1, len_b - 1)) return false;
  for (size_t k = 1; k < pairs.size(); ++k) {
    const int64_t di = pairs[k].first - pairs[k - 1].first;
    const int64_t dj = pairs[k].second - pairs[k - 1].second;
    const bool ok = (di == 1 && dj == 0) || (di == 0 && dj == 1) || (di == 1 && dj == 1);
    if (!ok) return false;
  }
  return true;
}

AlignmentPath dtw_align(const audio::FrameMatrix& converted,
                        const audio::FrameMatrix& target) {
  const int64_t n = converted.rows();
  const int64_t m = target.rows();
  ZSVC_CHECK(n >= 1 && m >= 1, DataError, "dtw needs non-empty sequences");
  ZSVC_CHECK(converted.cols() == target.cols(), DataError,
             "dtw sequences must share the frame dimension");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  audio::FrameMatrix acc(n, m);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < m; ++j) {
      const double d = (converted.row(i) - target.row(j)).norm();
      const double diag = (i > 0 && j > 0) ? acc(i - 1, j - 1) : kInf;
      const double up = i > 0 ? acc(i - 1, j) : kInf;
      const double left = j > 0 ? acc(i, j - 1) : kInf;
      const double best =
          (i == 0 && j == 0) ? 0.0 : std::min({diag, up, left});
      acc(i, j) = d + best;
    }
  }

  AlignmentPath path;
  path.cost = acc(n - 1, m - 1);
  int64_t i = n - 1, j = m - 1;
  path.pairs.emplace_back(i, j);
  while (i > 0 || j > 0) {
    const double diag = (i > 0 && j > 0) ? acc(i - 1, j - 1) : kInf;
    const double up = i > 0 ? acc(i - 1, j) : kInf;
    const double left = j > 0 ? acc(i, j - 1) : kInf;
    const double best = std::min({diag, up, left});
    if (diag == best) {  // ties prefer the diagonal
      --i;
      --j;
    } else if (up == best) {
      --i;
    } else {
      --j;
    }
    path.pairs.emplace_back(i, j);
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

}  // namespace zsvc::eval
