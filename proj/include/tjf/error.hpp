// Copyright 2026 The TJF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TJF__ERROR_HPP_
#define TJF__ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tjf
{

enum class ErrorCode {
  MissingReferenceState,
  UnknownAgent,
  DegenerateLane,
  UnknownObjectType,
  ShapeMismatch,
  NotScalarLoss,
  MissingGradients,
  NoValidFuture,
  TooFewPoints,
  EmptyDataset,
  NonFiniteLoss,
  MixedHorizons,
  CorruptCheckpoint,
  ParseError,
  InvariantViolation,
  InvalidConfig,
  IoError,
};

inline const char * to_string(ErrorCode code) noexcept
{
  switch (code) {
    case ErrorCode::MissingReferenceState: return "MissingReferenceState";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::DegenerateLane: return "DegenerateLane";
    case ErrorCode::UnknownObjectType: return "UnknownObjectType";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotScalarLoss: return "NotScalarLoss";
    case ErrorCode::MissingGradients: return "MissingGradients";
    case ErrorCode::NoValidFuture: return "NoValidFuture";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::MixedHorizons: return "MixedHorizons";
    case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/**
 * @brief Exception type thrown by every tjf module.
 *
 * `detail()` holds the bare message (a field name for InvariantViolation,
 * CorruptCheckpoint and InvalidConfig), `what()` is prefixed with the code.
 */
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string & detail)
  : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail)
  {
  }

  ErrorCode code() const noexcept { return code_; }
  const std::string & detail() const noexcept { return detail_; }

private:
  ErrorCode code_;
  std::string detail_;
};

/// Parse failure with 1-based line and field positions (0 when unknown).
class ParseError : public Error
{
public:
  ParseError(std::size_t line, std::size_t field, const std::string & detail)
  : Error(
      ErrorCode::ParseError,
      "line " + std::to_string(line) + ", field " + std::to_string(field) + ": " + detail),
    line_(line),
    field_(field)
  {
  }

  std::size_t line() const noexcept { return line_; }
  std::size_t field() const noexcept { return field_; }

private:
  std::size_t line_;
  std::size_t field_;
};

}  // namespace tjf

#endif  // TJF__ERROR_HPP_
