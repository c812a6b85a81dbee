// zsvc/speaker/ge2e.h

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

#ifndef ZSVC_SPEAKER_GE2E_H_
#define ZSVC_SPEAKER_GE2E_H_

#include <vector>

#include "zsvc/nn/autodiff.h"

namespace zsvc::speaker {

// Softmax-variant generalized end-to-end loss over an N-speaker x M-utterance
// batch of unit embeddings. Similarity to a centroid is w * cos + b with a
// learned scale w > 0 and bias b; an utterance is excluded from its own
// speaker's centroid. Lower is better: the loss falls as same-speaker
// embeddings tighten around their centroid and other speakers move away.
//
// embeddings[j][i] is utterance i of speaker j, each {D}. Requires N >= 2
// and M >= 2. The result is the sum of per-utterance terms
//   -S(j,i;j) + log(sum_k exp(S(j,i;k))).
nn::Var ge2e_loss(const std::vector<std::vector<nn::Var>>& embeddings,
                  const nn::Var& scale_w, const nn::Var& bias_b);

// Plain-number evaluation of the same formula (no graph); used by oracles
// and by callers that only need the value.
double ge2e_loss_value(const std::vector<std::vector<Eigen::VectorXd>>& embeddings,
                       double scale_w, double bias_b);

}  // namespace zsvc::speaker

#endif  // ZSVC_SPEAKER_GE2E_H_
