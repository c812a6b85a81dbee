// zsvc/speaker/ge2e.cpp

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

#include "zsvc/speaker/ge2e.h"

#include <cmath>

#include "zsvc/common/error.h"

namespace zsvc::speaker {

using nn::Var;

namespace {

void check_batch_shape(size_t n, size_t m) {
  ZSVC_CHECK(n >= 2, ConfigError,
             "ge2e loss needs at least 2 speakers (centroid contrast undefined)");
  ZSVC_CHECK(m >= 2, ConfigError, "ge2e loss needs at least 2 utterances per speaker");
}

}  // namespace

Var ge2e_loss(const std::vector<std::vector<Var>>& embeddings,
              const Var& scale_w, const Var& bias_b) {
  const size_t n = embeddings.size();
  check_batch_shape(n, n ? embeddings[0].size() : 0);
  const size_t m = embeddings[0].size();
  for (const auto& spk : embeddings)
    ZSVC_CHECK(spk.size() == m, ConfigError,
               "every speaker must contribute the same number of utterances");

  // Per-speaker embedding sums; full centroids are sum/M, self-excluded
  // centroids (sum - e)/(M-1).
  std::vector<Var> sums(n);
  for (size_t j = 0; j < n; ++j) {
    Var s = embeddings[j][0];
    for (size_t i = 1; i < m; ++i) s = nn::add(s, embeddings[j][i]);
    sums[j] = s;
  }
  std::vector<Var> centroids(n);
  for (size_t j = 0; j < n; ++j)
    centroids[j] = nn::mul_scalar(sums[j], 1.0 / static_cast<double>(m));

  Var total = Var::constant(nn::Tensor::scalar(0.0));
  for (size_t j = 0; j < n; ++j) {
    for (size_t i = 0; i < m; ++i) {
      const Var& e = embeddings[j][i];
      Var own_centroid = nn::mul_scalar(nn::sub(sums[j], e),
                                        1.0 / static_cast<double>(m - 1));
      std::vector<Var> scores;
      scores.reserve(n);
      Var own_score;
      for (size_t k = 0; k < n; ++k) {
        const Var& c = (k == j) ? own_centroid : centroids[k];
        Var s = nn::add(nn::mul(scale_w, nn::cosine_similarity(e, c)), bias_b);
        if (k == j) own_score = s;
        scores.push_back(std::move(s));
      }
      total = nn::add(total, nn::sub(nn::logsumexp(nn::concat0(scores)), own_score));
    }
  }
  return total;
}

double ge2e_loss_value(const std::vector<std::vector<Eigen::VectorXd>>& embeddings,
                       double scale_w, double bias_b) {
  const size_t n = embeddings.size();
  check_batch_shape(n, n ? embeddings[0].size() : 0);
  const size_t m = embeddings[0].size();

  std::vector<Eigen::VectorXd> sums(n);
  for (size_t j = 0; j < n; ++j) {
    sums[j] = embeddings[j][0];
    for (size_t i = 1; i < m; ++i) sums[j] += embeddings[j][i];
  }

  auto cosine = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.dot(b) / (a.norm() * b.norm());
  };

  double total = 0.0;
  for (size_t j = 0; j < n; ++j) {
    for (size_t i = 0; i < m; ++i) {
      const Eigen::VectorXd& e = embeddings[j][i];
      double own = 0.0, max_score = -1e300;
      std::vector<double> scores(n);
      for (size_t k = 0; k < n; ++k) {
        const Eigen::VectorXd c =
            (k == j) ? ((sums[j] - e) / static_cast<double>(m - 1)).eval()
                     : (sums[k] / static_cast<double>(m)).eval();
        scores[k] = scale_w * cosine(e, c) + bias_b;
        if (k == j) own = scores[k];
        max_score = std::max(max_score, scores[k]);
      }
      double lse = 0.0;
      for (double s : scores) lse += std::exp(s - max_score);
      total += max_score + std::log(lse) - own;
    }
  }
  return total;
}

}  // namespace zsvc::speaker
