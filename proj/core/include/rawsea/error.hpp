#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rawsea {

enum class ErrorCode {
  // raster
  MissingBand,
  DimensionMismatch,
  BitDepthViolation,
  EmptyIntersection,
  InvalidAngle,
  InvalidArgument,
  Io,
  Format,
  // coregister
  MissingTableEntry,
  ConstantInput,
  // labeler
  ConstantPatch,
  NonConvergence,
  SizeMismatch,
  // ais-match
  MissingColumn,
  EmptyFile,
  FrameMismatch,
  // eval
  ZeroAreaGroundTruth,
  // band analysis
  InsufficientSeaPixels,
  EmptyBoxes,
  ConstantBand,
  // sensor
  KernelTooSmall,
  SharpeningRequested,
  // aiscoco
  SchemaViolation,
  DanglingReference,
  InvariantViolation,
  UnknownAnnotationId,
  // server
  PortInUse,
  StoreLocked,
  Conflict,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Domain error carrying a machine-readable code. SchemaViolation errors
/// also carry the JSON path of the first failing element.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string path = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  ErrorCode code_;
  std::string path_;
};

}  // namespace rawsea
