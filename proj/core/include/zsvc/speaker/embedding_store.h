// zsvc/speaker/embedding_store.h

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

#ifndef ZSVC_SPEAKER_EMBEDDING_STORE_H_
#define ZSVC_SPEAKER_EMBEDDING_STORE_H_

#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "zsvc/speaker/encoder.h"

namespace zsvc::speaker {

// Persistent per-speaker embedding cache: one JSON record per speaker on
// disk, an in-memory map in front of it. Embeddings are computed once per
// speaker and reused for every subsequent conversion. Concurrent readers are
// fine; writes take the exclusive lock.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::filesystem::path dir);

  std::optional<SpeakerEmbedding> get(const std::string& speaker_id) const;
  void put(const SpeakerEmbedding& embedding,
           const std::vector<std::string>& utterance_ids);

  // Returns the cached embedding when present; otherwise runs `compute`,
  // persists the result and returns it. The number of compute invocations is
  // observable through compute_count().
  SpeakerEmbedding get_or_compute(
      const std::string& speaker_id,
      const std::function<SpeakerEmbedding()>& compute,
      const std::vector<std::string>& utterance_ids = {});

  uint64_t compute_count() const { return computes_.load(); }
  std::vector<std::string> speaker_ids() const;

  // Packed binary bulk export: record count followed by
  // (id length, id bytes, float32 vector) per speaker.
  void export_packed(const std::filesystem::path& path) const;

 private:
  std::filesystem::path record_path(const std::string& speaker_id) const;
  std::optional<SpeakerEmbedding> load_record(const std::string& speaker_id) const;
  void store_record(const SpeakerEmbedding& embedding,
                    const std::vector<std::string>& utterance_ids) const;

  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, SpeakerEmbedding> cache_;
  std::atomic<uint64_t> computes_{0};
};

}  // namespace zsvc::speaker

#endif  // ZSVC_SPEAKER_EMBEDDING_STORE_H_
