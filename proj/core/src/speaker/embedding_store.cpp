// zsvc/speaker/embedding_store.cpp

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

#include "zsvc/speaker/embedding_store.h"

#include <fstream>
#include <mutex>

#include <nlohmann/json.hpp>

namespace zsvc::speaker {

namespace {

// Speaker ids come from directory names; keep filenames safe regardless.
std::string sanitize(const std::string& id) {
  std::string out = id;
  for (char& c : out)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'))
      c = '_';
  return out;
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  ZSVC_CHECK(!ec && std::filesystem::is_directory(dir_), DataError,
             "cannot create embedding store at " + dir_.string());
}

std::filesystem::path EmbeddingStore::record_path(const std::string& speaker_id) const {
  return dir_ / (sanitize(speaker_id) + ".json");
}

std::optional<SpeakerEmbedding> EmbeddingStore::load_record(
    const std::string& speaker_id) const {
  const auto path = record_path(speaker_id);
  if (!std::filesystem::exists(path)) return std::nullopt;
  std::ifstream in(path);
  ZSVC_CHECK(in.good(), DataError, "cannot read embedding record: " + path.string());
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    SpeakerEmbedding e;
    e.speaker_id = j.at("speaker_id").get<std::string>();
    const auto vals = j.at("embedding").get<std::vector<double>>();
    e.vec = Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                              static_cast<Eigen::Index>(vals.size()));
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError("bad embedding record " + path.string() + ": " + ex.what());
  }
}

void EmbeddingStore::store_record(const SpeakerEmbedding& embedding,
                                  const std::vector<std::string>& utterance_ids) const {
  nlohmann::json j;
  j["speaker_id"] = embedding.speaker_id;
  // Stored at float32 precision; that is the fidelity contract for the store.
  std::vector<double> vals(static_cast<size_t>(embedding.vec.size()));
  for (Eigen::Index i = 0; i < embedding.vec.size(); ++i)
    vals[static_cast<size_t>(i)] = static_cast<double>(static_cast<float>(embedding.vec(i)));
  j["embedding"] = vals;
  j["utterances"] = utterance_ids;
  const auto path = record_path(embedding.speaker_id);
  std::ofstream out(path, std::ios::trunc);
  ZSVC_CHECK(out.good(), DataError, "cannot write embedding record: " + path.string());
  out << j.dump(2) << "\n";
  out.flush();
  ZSVC_CHECK(out.good(), DataError, "write failed: " + path.string());
}

std::optional<SpeakerEmbedding> EmbeddingStore::get(const std::string& speaker_id) const {
  {
    std::shared_lock lock(mu_);
    auto it = cache_.find(speaker_id);
    if (it != cache_.end()) return it->second;
  }
  auto loaded = load_record(speaker_id);
  if (loaded) {
    std::unique_lock lock(mu_);
    cache_[speaker_id] = *loaded;
  }
  return loaded;
}

void EmbeddingStore::put(const SpeakerEmbedding& embedding,
                         const std::vector<std::string>& utterance_ids) {
  ZSVC_CHECK(!embedding.speaker_id.empty(), ConfigError,
             "embedding record needs a speaker id");
  std::unique_lock lock(mu_);
  store_record(embedding, utterance_ids);
  cache_[embedding.speaker_id] = embedding;
}

SpeakerEmbedding EmbeddingStore::get_or_compute(
    const std::string& speaker_id,
    const std::function<SpeakerEmbedding()>& compute,
    const std::vector<std::string>& utterance_ids) {
  if (auto cached = get(speaker_id)) return *cached;
  SpeakerEmbedding e = compute();
  e.speaker_id = speaker_id;
  computes_.fetch_add(1);
  put(e, utterance_ids);
  return e;
}

std::vector<std::string> EmbeddingStore::speaker_ids() const {
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    try {
      nlohmann::json j = nlohmann::json::parse(in);
      ids.push_back(j.at("speaker_id").get<std::string>());
    } catch (...) {
      // Skip foreign files.
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void EmbeddingStore::export_packed(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  ZSVC_CHECK(out.good(), DataError, "cannot open for writing: " + path.string());
  const auto ids = speaker_ids();
  out.write("ZEMB1\n", 6);
  const uint32_t count = static_cast<uint32_t>(ids.size());
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (const auto& id : ids) {
    auto rec = load_record(id);
    ZSVC_CHECK(rec.has_value(), DataError, "missing record during export: " + id);
    const uint32_t len = static_cast<uint32_t>(id.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(id.data(), len);
    const uint32_t dim = static_cast<uint32_t>(rec->vec.size());
    out.write(reinterpret_cast<const char*>(&dim), 4);
    for (Eigen::Index i = 0; i < rec->vec.size(); ++i) {
      const float v = static_cast<float>(rec->vec(i));
      out.write(reinterpret_cast<const char*>(&v), 4);
    }
  }
  out.flush();
  ZSVC_CHECK(out.good(), DataError, "write failed: " + path.string());
}

}  // namespace zsvc::speaker
