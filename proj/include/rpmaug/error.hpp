/**
 * Copyright 2026 The rpmaug Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rpmaug {

enum class ErrorCode {
  kInvalidArgument,
  // single-array format
  kBadMagic,
  kUnsupportedVersion,
  kMalformedHeader,
  kTruncated,
  kUnsupportedDtype,
  kSizeMismatch,
  kFortranOrder,
  // archive container
  kBadZip,
  kMissingMember,
  kWrongShape,
  kTargetOutOfRange,
  kIo,
  // generator
  kDomainOverflow,
  kGenerationExhausted,
  // analysis
  kDegenerateVariance,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kBadMagic: return "BAD_MAGIC";
    case ErrorCode::kUnsupportedVersion: return "UNSUPPORTED_VERSION";
    case ErrorCode::kMalformedHeader: return "MALFORMED_HEADER";
    case ErrorCode::kTruncated: return "TRUNCATED";
    case ErrorCode::kUnsupportedDtype: return "UNSUPPORTED_DTYPE";
    case ErrorCode::kSizeMismatch: return "SIZE_MISMATCH";
    case ErrorCode::kFortranOrder: return "FORTRAN_ORDER";
    case ErrorCode::kBadZip: return "BAD_ZIP";
    case ErrorCode::kMissingMember: return "MISSING_MEMBER";
    case ErrorCode::kWrongShape: return "WRONG_SHAPE";
    case ErrorCode::kTargetOutOfRange: return "TARGET_OUT_OF_RANGE";
    case ErrorCode::kIo: return "IO";
    case ErrorCode::kDomainOverflow: return "DOMAIN_OVERFLOW";
    case ErrorCode::kGenerationExhausted: return "GENERATION_EXHAUSTED";
    case ErrorCode::kDegenerateVariance: return "DEGENERATE_VARIANCE";
  }
  return "UNKNOWN";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for codes caused by malformed or unreadable files.
  bool is_format_error() const noexcept {
    switch (code_) {
      case ErrorCode::kBadMagic:
      case ErrorCode::kUnsupportedVersion:
      case ErrorCode::kMalformedHeader:
      case ErrorCode::kTruncated:
      case ErrorCode::kUnsupportedDtype:
      case ErrorCode::kSizeMismatch:
      case ErrorCode::kFortranOrder:
      case ErrorCode::kBadZip:
      case ErrorCode::kMissingMember:
      case ErrorCode::kWrongShape:
      case ErrorCode::kTargetOutOfRange:
      case ErrorCode::kIo:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::kInvalidArgument, what);
}

}  // namespace rpmaug
