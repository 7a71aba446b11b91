#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace s2cgan {

enum class ErrorCode {
  kShapeMismatch,
  kBadMask,
  kUnsupportedFormat,
  kDegenerateBand,
  kSceneTooSmall,
  kBadSpatialDims,
  kDivergence,
  kDegenerateMap,
  kNonBinaryInput,
  kBlobOutOfBounds,
  kCheckpointMismatch,
  kInvalidArgument,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code; the CLI maps codes to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace s2cgan
