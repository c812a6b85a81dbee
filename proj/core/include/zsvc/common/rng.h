// zsvc/common/rng.h

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

#ifndef ZSVC_COMMON_RNG_H_
#define ZSVC_COMMON_RNG_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace zsvc {

// All randomness in a run flows from one root seed. Subsystems derive
// namespaced sub-seeds so that adding a consumer in one place does not
// perturb the stream of another.
uint64_t derive_seed(uint64_t root_seed, const std::string& ns);

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(engine_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> d(mean, stddev);
    return d(engine_);
  }
  // Inclusive bounds.
  int64_t randint(int64_t lo, int64_t hi) {
    std::uniform_int_distribution<int64_t> d(lo, hi);
    return d(engine_);
  }
  bool bernoulli(double p) {
    std::bernoulli_distribution d(p);
    return d(engine_);
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    std::shuffle(v.begin(), v.end(), engine_);
  }

  std::mt19937_64& engine() { return engine_; }
  const std::mt19937_64& engine() const { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace zsvc

#endif  // ZSVC_COMMON_RNG_H_
