// zsvc/audio/resample.h

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

#ifndef ZSVC_AUDIO_RESAMPLE_H_
#define ZSVC_AUDIO_RESAMPLE_H_

#include <vector>

namespace zsvc::audio {

// Windowed-sinc resampling to an arbitrary rate. Output length is
// round(n * dst_rate / src_rate). Equal rates return the input unchanged.
std::vector<double> resample(const std::vector<double>& in, int src_rate,
                             int dst_rate);

}  // namespace zsvc::audio

#endif  // ZSVC_AUDIO_RESAMPLE_H_
