// zsvc/nn/serialize.cpp

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

#include "zsvc/nn/serialize.h"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace zsvc::nn {

namespace {
constexpr char kMagic[6] = {'Z', 'S', 'T', 'C', '1', '\n'};
}

const Tensor& NamedTensors::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw ConfigError("checkpoint has no tensor named '" + name + "'");
}

bool NamedTensors::contains(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return true;
  return false;
}

void save_named_tensors(const std::filesystem::path& path, const NamedTensors& bundle) {
  nlohmann::json header;
  header["kind"] = bundle.kind;
  header["arch"] = bundle.arch_json.empty()
                       ? nlohmann::json::object()
                       : nlohmann::json::parse(bundle.arch_json);
  header["meta"] = bundle.meta_json.empty()
                       ? nlohmann::json::object()
                       : nlohmann::json::parse(bundle.meta_json);
  nlohmann::json dir = nlohmann::json::array();
  int64_t offset = 0;
  for (const auto& [name, t] : bundle.tensors) {
    dir.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += t.size();
  }
  header["tensors"] = dir;
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  ZSVC_CHECK(out.good(), DataError, "cannot open for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const uint64_t hlen = header_str.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(header_str.data(), static_cast<std::streamsize>(hlen));
  for (const auto& [name, t] : bundle.tensors) {
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  out.flush();
  ZSVC_CHECK(out.good(), DataError, "write failed: " + path.string());
}

NamedTensors load_named_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  ZSVC_CHECK(in.good(), DataError, "cannot open checkpoint: " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  ZSVC_CHECK(in.good() && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0,
             DataError, "not a tensor container: " + path.string());
  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  ZSVC_CHECK(in.good() && hlen > 0 && hlen < (1ull << 30), DataError,
             "corrupt container header: " + path.string());
  std::string header_str(hlen, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(hlen));
  ZSVC_CHECK(in.good(), DataError, "truncated container header: " + path.string());

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad container header in " + path.string() + ": " + e.what());
  }

  NamedTensors bundle;
  bundle.kind = header.value("kind", "");
  bundle.arch_json = header.contains("arch") ? header["arch"].dump() : "{}";
  bundle.meta_json = header.contains("meta") ? header["meta"].dump() : "{}";
  for (const auto& entry : header.at("tensors")) {
    std::vector<Index> shape = entry.at("shape").get<std::vector<Index>>();
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    ZSVC_CHECK(in.good(), DataError, "truncated tensor payload: " + path.string());
    bundle.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(t));
  }
  return bundle;
}

void pack_params(const ParamSet& params, const std::string& prefix,
                 NamedTensors& bundle) {
  for (const auto& [name, v] : params.items())
    bundle.tensors.emplace_back(prefix + name, v.value());
}

void unpack_params(ParamSet& params, const std::string& prefix,
                   const NamedTensors& bundle) {
  for (auto& [name, v] : params.items()) {
    const Tensor& t = bundle.find(prefix + name);
    ZSVC_CHECK(t.same_shape(v.value()), ConfigError,
               "checkpoint tensor '" + prefix + name + "' has mismatched shape");
    v.node()->value = t;
  }
}

}  // namespace zsvc::nn
