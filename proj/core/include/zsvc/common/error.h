// zsvc/common/error.h

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

#ifndef ZSVC_COMMON_ERROR_H_
#define ZSVC_COMMON_ERROR_H_

#include <stdexcept>
#include <string>

namespace zsvc {

// Error categories map onto the CLI exit codes: config -> 2, data -> 3,
// divergence -> 4. Everything else exits 1.
enum class ErrorKind {
  kConfig,
  kData,
  kDivergence,
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int exit_code() const {
    switch (kind_) {
      case ErrorKind::kConfig: return 2;
      case ErrorKind::kData: return 3;
      case ErrorKind::kDivergence: return 4;
      default: return 1;
    }
  }

 private:
  ErrorKind kind_;
};

// Bad arguments, bad config values, missing checkpoints, architecture
// mismatches, impossible schedules.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

// Unreadable or malformed inputs, empty datasets, shape violations.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

// Non-finite losses or gradients during optimization.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what) : Error(ErrorKind::kDivergence, what) {}
};

#define ZSVC_CHECK(cond, ErrorType, msg)        \
  do {                                          \
    if (!(cond)) throw ErrorType(msg);          \
  } while (0)

}  // namespace zsvc

#endif  // ZSVC_COMMON_ERROR_H_
