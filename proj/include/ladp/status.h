/*
 * Copyright 2026 The ladp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef LADP_STATUS_H_
#define LADP_STATUS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ladp {

// Every failure raised by the library carries one of these codes so callers
// (tests, the CLI exit-code mapping) can branch without parsing messages.
enum class ErrorCode {
  kShapeMismatch,
  kMismatchedLength,
  kNotADistribution,
  kNegativeStd,
  kNonFinite,
  kNonPositiveClip,
  kNonPositiveInput,
  kInvalidDelta,
  kInvalidEpsilon,
  kInvalidBudget,
  kInvalidSizes,
  kInvalidRate,
  kInvalidConstants,
  kEtaOutOfWindow,
  kEmptyDataset,
  kEmptyClientDataset,
  kEmptyCollection,
  kTooFewClients,
  kMissingClass,
  kInvalidParams,
  kParseError,
  kValidationError,
  kFormatError,
  kDimensionMismatch,
  kIoError,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kMismatchedLength: return "MismatchedLength";
    case ErrorCode::kNotADistribution: return "NotADistribution";
    case ErrorCode::kNegativeStd: return "NegativeStd";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kNonPositiveClip: return "NonPositiveClip";
    case ErrorCode::kNonPositiveInput: return "NonPositiveInput";
    case ErrorCode::kInvalidDelta: return "InvalidDelta";
    case ErrorCode::kInvalidEpsilon: return "InvalidEpsilon";
    case ErrorCode::kInvalidBudget: return "InvalidBudget";
    case ErrorCode::kInvalidSizes: return "InvalidSizes";
    case ErrorCode::kInvalidRate: return "InvalidRate";
    case ErrorCode::kInvalidConstants: return "InvalidConstants";
    case ErrorCode::kEtaOutOfWindow: return "EtaOutOfWindow";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kEmptyClientDataset: return "EmptyClientDataset";
    case ErrorCode::kEmptyCollection: return "EmptyCollection";
    case ErrorCode::kTooFewClients: return "TooFewClients";
    case ErrorCode::kMissingClass: return "MissingClass";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ladp

#endif  // LADP_STATUS_H_
