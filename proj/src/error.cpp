#include "s2cgan/error.hpp"

namespace s2cgan {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "SHAPE_MISMATCH";
    case ErrorCode::kBadMask: return "BAD_MASK";
    case ErrorCode::kUnsupportedFormat: return "UNSUPPORTED_FORMAT";
    case ErrorCode::kDegenerateBand: return "DEGENERATE_BAND";
    case ErrorCode::kSceneTooSmall: return "SCENE_TOO_SMALL";
    case ErrorCode::kBadSpatialDims: return "BAD_SPATIAL_DIMS";
    case ErrorCode::kDivergence: return "DIVERGENCE";
    case ErrorCode::kDegenerateMap: return "DEGENERATE_MAP";
    case ErrorCode::kNonBinaryInput: return "NON_BINARY_INPUT";
    case ErrorCode::kBlobOutOfBounds: return "BLOB_OUT_OF_BOUNDS";
    case ErrorCode::kCheckpointMismatch: return "CHECKPOINT_MISMATCH";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kIo: return "IO_ERROR";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace s2cgan
