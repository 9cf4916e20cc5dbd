#pragma once

#include <stdexcept>
#include <string>

namespace sonoclass {

enum class Errc {
  kMalformedContainer,
  kUnsupportedEncoding,
  kEmptyAudio,
  kInvalidDuration,
  kClipTooShort,
  kDegenerateInput,
  kGridTooSmall,
  kShapeMismatch,
  kEmptyInput,
  kFilterIndexOutOfRange,
  kBadGrid,
  kBadShape,
  kPatchLargerThanPlane,
  kLengthMismatch,
  kKOutOfRange,
  kSingleClassInput,
  kClassTooSmall,
  kInsufficientClassSize,
  kDimensionMismatch,
  kInvalidArgument,
  kConfig,
  kManifest,
  kModelFormat,
  kIo,
};

const char* errc_name(Errc code) noexcept;

// True for errors caused by the caller's invocation (bad flags, bad config)
// rather than by the data being processed.
bool is_usage_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace sonoclass
