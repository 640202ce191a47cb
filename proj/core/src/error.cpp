#include "rawsea/error.hpp"

namespace rawsea {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingBand: return "MissingBand";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BitDepthViolation: return "BitDepthViolation";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::InvalidAngle: return "InvalidAngle";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
    case ErrorCode::MissingTableEntry: return "MissingTableEntry";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::ConstantPatch: return "ConstantPatch";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::ZeroAreaGroundTruth: return "ZeroAreaGroundTruth";
    case ErrorCode::InsufficientSeaPixels: return "InsufficientSeaPixels";
    case ErrorCode::EmptyBoxes: return "EmptyBoxes";
    case ErrorCode::ConstantBand: return "ConstantBand";
    case ErrorCode::KernelTooSmall: return "KernelTooSmall";
    case ErrorCode::SharpeningRequested: return "SharpeningRequested";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::UnknownAnnotationId: return "UnknownAnnotationId";
    case ErrorCode::PortInUse: return "PortInUse";
    case ErrorCode::StoreLocked: return "StoreLocked";
    case ErrorCode::Conflict: return "Conflict";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, const std::string& path) {
  std::string out{to_string(code)};
  out += ": ";
  out += message;
  if (!path.empty()) {
    out += " at ";
    out += path;
  }
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::string path)
    : std::runtime_error(compose(code, message, path)), code_(code), path_(std::move(path)) {}

}  // namespace rawsea
