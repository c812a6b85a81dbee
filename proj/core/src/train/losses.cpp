// zsvc/train/losses.cpp

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

#include "zsvc/train/losses.h"

namespace zsvc::train {

double identity_loss(const ConvertFn& convert, const audio::FrameMatrix& x,
                     const Eigen::VectorXd& source_embed) {
  return (convert(x, source_embed, source_embed) - x).norm();
}

double cycle_loss(const ConvertFn& convert, const audio::FrameMatrix& x,
                  const Eigen::VectorXd& source_embed,
                  const Eigen::VectorXd& target_embed) {
  const audio::FrameMatrix there = convert(x, source_embed, target_embed);
  const audio::FrameMatrix back = convert(there, target_embed, source_embed);
  const double l1 = (x - back).cwiseAbs().sum();
  return l1 * l1;
}

double generator_adv_loss(const CriticFn& critic, const audio::FrameMatrix& converted,
                          const Eigen::VectorXd& source_embed,
                          const Eigen::VectorXd& target_embed, double real_target) {
  const double d = critic(converted, source_embed, target_embed) - real_target;
  return d * d;
}

double discriminator_adv_loss(const CriticFn& critic,
                              const audio::FrameMatrix& converted,
                              const audio::FrameMatrix& real,
                              const Eigen::VectorXd& source_embed,
                              const Eigen::VectorXd& target_embed,
                              double real_target, double fake_target) {
  const double fake_term = critic(converted, source_embed, target_embed) - fake_target;
  const double real_term = critic(real, target_embed, source_embed) - real_target;
  return fake_term * fake_term + real_term * real_term;
}

double total_generator_loss(double identity, double cycle, double adversarial,
                            double identity_weight, double cycle_weight) {
  return identity_weight * identity + cycle_weight * cycle + adversarial;
}

}  // namespace zsvc::train
