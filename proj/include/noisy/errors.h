//
// Copyright 2026 The noisy-instruct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef NOISY_ERRORS_H_
#define NOISY_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace noisy {

enum class ErrorKind {
  kIo,
  kMalformedRecord,
  kDuplicateId,
  kPredictorUnavailable,
  kMalformedResponse,
  kPredictionCountMismatch,
  kExpectedCountMismatch,
  kConfig,
};

std::string_view ErrorKindName(ErrorKind kind);

// Base of every error the library raises. The kind is stable and is what the
// command-line tool reports in its machine-readable error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorKind::kIo, message) {}
};

// A source record that violates its schema. `location` is a record index
// (JSON arrays), a 1-based line number (JSONL) or a file name.
class MalformedRecord : public Error {
 public:
  MalformedRecord(std::string source, std::string location,
                  const std::string& what)
      : Error(ErrorKind::kMalformedRecord,
              source + ":" + location + ": " + what),
        source_(std::move(source)),
        location_(std::move(location)) {}

  const std::string& source() const { return source_; }
  const std::string& location() const { return location_; }

 private:
  std::string source_;
  std::string location_;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id)
      : Error(ErrorKind::kDuplicateId, "duplicate sample id: " + id), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class PredictorUnavailable : public Error {
 public:
  explicit PredictorUnavailable(const std::string& message)
      : Error(ErrorKind::kPredictorUnavailable, message) {}
};

class MalformedResponse : public Error {
 public:
  explicit MalformedResponse(const std::string& message)
      : Error(ErrorKind::kMalformedResponse, message) {}
};

class PredictionCountMismatch : public Error {
 public:
  PredictionCountMismatch(size_t expected, size_t got)
      : Error(ErrorKind::kPredictionCountMismatch,
              "predictor returned " + std::to_string(got) + " words for " +
                  std::to_string(expected) + " masks") {}
};

class ExpectedCountMismatch : public Error {
 public:
  explicit ExpectedCountMismatch(const std::string& message)
      : Error(ErrorKind::kExpectedCountMismatch, message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorKind::kConfig, message) {}
};

}  // namespace noisy

#endif  // NOISY_ERRORS_H_
