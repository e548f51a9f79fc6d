// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "occ/binio.hpp"

#include <fmt/format.h>

#include <vector>

#include "occ/error.hpp"

namespace occ {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kDuplicateTimestamp: return "DuplicateTimestamp";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kEmptySeries: return "EmptySeries";
    case ErrorCode::kBoundaryOutsideSeries: return "BoundaryOutsideSeries";
    case ErrorCode::kDegenerateFeature: return "DegenerateFeature";
    case ErrorCode::kSeriesTooShort: return "SeriesTooShort";
    case ErrorCode::kUnknownFeature: return "UnknownFeature";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSingleClassTraining: return "SingleClassTraining";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNoPositives: return "NoPositives";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kIllConditionedKernel: return "IllConditionedKernel";
    case ErrorCode::kObjectiveFailure: return "ObjectiveFailure";
    case ErrorCode::kUnsupportedModel: return "UnsupportedModel";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kFormat: return "FormatError";
  }
  return "Unknown";
}

BinaryWriter::BinaryWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
  if (!out_) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", path.string()));
}

void BinaryWriter::raw(const void* data, std::size_t n) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out_) throw Error(ErrorCode::kIo, fmt::format("write failed for '{}'", path_.string()));
}

void BinaryWriter::put_string(std::string_view s) {
  put(static_cast<std::uint32_t>(s.size()));
  raw(s.data(), s.size());
}

void BinaryWriter::close() {
  out_.close();
  if (!out_) throw Error(ErrorCode::kIo, fmt::format("close failed for '{}'", path_.string()));
}

BinaryReader::BinaryReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorCode::kIo, fmt::format("cannot open '{}'", path.string()));
}

void BinaryReader::raw(void* data, std::size_t n) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) {
    throw Error(ErrorCode::kFormat, fmt::format("'{}' is truncated", path_.string()));
  }
}

std::string BinaryReader::get_string() {
  const auto n = get<std::uint32_t>();
  if (n > (1u << 20)) throw Error(ErrorCode::kFormat, "string length out of range");
  std::string s(n, '\0');
  raw(s.data(), n);
  return s;
}

void BinaryReader::expect_magic(std::string_view tag) {
  std::vector<char> buf(tag.size());
  raw(buf.data(), buf.size());
  if (std::string_view(buf.data(), buf.size()) != tag) {
    throw Error(ErrorCode::kFormat, fmt::format("'{}' is not a {} file", path_.string(), tag));
  }
}

}  // namespace occ
