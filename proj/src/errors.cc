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

#include "noisy/errors.h"

namespace noisy {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kMalformedRecord: return "MalformedRecord";
    case ErrorKind::kDuplicateId: return "DuplicateId";
    case ErrorKind::kPredictorUnavailable: return "PredictorUnavailable";
    case ErrorKind::kMalformedResponse: return "MalformedResponse";
    case ErrorKind::kPredictionCountMismatch: return "PredictionCountMismatch";
    case ErrorKind::kExpectedCountMismatch: return "ExpectedCountMismatch";
    case ErrorKind::kConfig: return "ConfigError";
  }
  return "Error";
}

}  // namespace noisy
