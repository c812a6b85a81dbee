// zsvc/audio/vocoder.h

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

#ifndef ZSVC_AUDIO_VOCODER_H_
#define ZSVC_AUDIO_VOCODER_H_

#include <cstdint>
#include <memory>

#include "zsvc/audio/mel.h"

namespace zsvc::audio {

// Pluggable spectrogram-to-waveform interface. The bundled implementation is
// classical iterative phase reconstruction; a neural vocoder can be swapped
// in behind the same interface.
class Vocoder {
 public:
  virtual ~Vocoder() = default;
  virtual Waveform synthesize(const MelSpectrogram& mel) const = 0;
};

// Iterative phase reconstruction: mel -> linear magnitudes through the
// filterbank pseudo-inverse, then alternating STFT projections with a
// deterministic seeded phase init.
Waveform reconstruct_waveform(const MelSpectrogram& mel, int iterations,
                              uint64_t seed = 0, const MelConfig& cfg = {});

class GriffinLimVocoder : public Vocoder {
 public:
  explicit GriffinLimVocoder(int iterations = 60, uint64_t seed = 0,
                             MelConfig cfg = {})
      : iterations_(iterations), seed_(seed), cfg_(cfg) {}
  Waveform synthesize(const MelSpectrogram& mel) const override {
    return reconstruct_waveform(mel, iterations_, seed_, cfg_);
  }

 private:
  int iterations_;
  uint64_t seed_;
  MelConfig cfg_;
};

}  // namespace zsvc::audio

#endif  // ZSVC_AUDIO_VOCODER_H_
