// zsvc/nn/serialize.h

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

#ifndef ZSVC_NN_SERIALIZE_H_
#define ZSVC_NN_SERIALIZE_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "zsvc/nn/layers.h"

namespace zsvc::nn {

// Named-tensor container: a JSON header (kind, architecture metadata, run
// provenance, tensor directory) followed by a raw float64 payload. Checkpoints
// self-describe; loaders must verify `arch` against their expected
// configuration before accepting the payload.
struct NamedTensors {
  std::string kind;
  std::string arch_json;  // serialized architecture metadata
  std::string meta_json;  // provenance: seed, config hash, counters
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& find(const std::string& name) const;
  bool contains(const std::string& name) const;
};

void save_named_tensors(const std::filesystem::path& path, const NamedTensors& bundle);
NamedTensors load_named_tensors(const std::filesystem::path& path);

// Copies every parameter in `params` into the bundle under `prefix + name`.
void pack_params(const ParamSet& params, const std::string& prefix,
                 NamedTensors& bundle);
// Writes bundle tensors back into an already-constructed parameter set.
// Throws ConfigError when a parameter is missing or shaped differently.
void unpack_params(ParamSet& params, const std::string& prefix,
                   const NamedTensors& bundle);

}  // namespace zsvc::nn

#endif  // ZSVC_NN_SERIALIZE_H_
