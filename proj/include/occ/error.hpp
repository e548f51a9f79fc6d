// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef OCC_ERROR_HPP
#define OCC_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace occ {

enum class ErrorCode {
  kMalformedRow,
  kDuplicateTimestamp,
  kMissingColumn,
  kEmptySeries,
  kBoundaryOutsideSeries,
  kDegenerateFeature,
  kSeriesTooShort,
  kUnknownFeature,
  kDimensionMismatch,
  kSingleClassTraining,
  kNonFiniteLoss,
  kNoConvergence,
  kShapeMismatch,
  kNoPositives,
  kEmptySet,
  kIllConditionedKernel,
  kObjectiveFailure,
  kUnsupportedModel,
  kInvalidArgument,
  kIo,
  kFormat,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace occ

#endif  // OCC_ERROR_HPP
