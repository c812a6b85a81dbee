// zsvc/train/losses.h

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

#ifndef ZSVC_TRAIN_LOSSES_H_
#define ZSVC_TRAIN_LOSSES_H_

#include <functional>

#include "zsvc/audio/mel.h"

namespace zsvc::train {

// Plain-number loss formulas over arbitrary conversion/critic callables.
// Norms run over all spectrogram entries: L2 is the Frobenius norm, L1 the
// entrywise absolute sum. None of these ever touch a parallel target
// utterance; training is non-parallel by construction.

using ConvertFn = std::function<audio::FrameMatrix(
    const audio::FrameMatrix&, const Eigen::VectorXd& source,
    const Eigen::VectorXd& target)>;
using CriticFn = std::function<double(const audio::FrameMatrix&,
                                      const Eigen::VectorXd& source,
                                      const Eigen::VectorXd& target)>;

// || G(x, s, s) - x ||_2
double identity_loss(const ConvertFn& convert, const audio::FrameMatrix& x,
                     const Eigen::VectorXd& source_embed);

// ( || x - G(G(x, s, t), t, s) ||_1 )^2 — the L1 cyclic error, squared.
double cycle_loss(const ConvertFn& convert, const audio::FrameMatrix& x,
                  const Eigen::VectorXd& source_embed,
                  const Eigen::VectorXd& target_embed);

// ( D(x_conv, s, t) - real_target )^2
double generator_adv_loss(const CriticFn& critic, const audio::FrameMatrix& converted,
                          const Eigen::VectorXd& source_embed,
                          const Eigen::VectorXd& target_embed, double real_target);

// ( D(x_conv, s, t) - fake_target )^2 + ( D(x_real, t, s) - real_target )^2.
// Note the swapped embedding order on the real term: the critic scores the
// source utterance as the "target" of the reverse pairing.
double discriminator_adv_loss(const CriticFn& critic,
                              const audio::FrameMatrix& converted,
                              const audio::FrameMatrix& real,
                              const Eigen::VectorXd& source_embed,
                              const Eigen::VectorXd& target_embed,
                              double real_target, double fake_target);

// identity_weight * id + cycle_weight * cyc + adv
double total_generator_loss(double identity, double cycle, double adversarial,
                            double identity_weight, double cycle_weight);

}  // namespace zsvc::train

#endif  // ZSVC_TRAIN_LOSSES_H_
