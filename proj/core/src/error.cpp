#include "sonoclass/error.hpp"

namespace sonoclass {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kMalformedContainer: return "MalformedContainer";
    case Errc::kUnsupportedEncoding: return "UnsupportedEncoding";
    case Errc::kEmptyAudio: return "EmptyAudio";
    case Errc::kInvalidDuration: return "InvalidDuration";
    case Errc::kClipTooShort: return "ClipTooShort";
    case Errc::kDegenerateInput: return "DegenerateInput";
    case Errc::kGridTooSmall: return "GridTooSmall";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kEmptyInput: return "EmptyInput";
    case Errc::kFilterIndexOutOfRange: return "FilterIndexOutOfRange";
    case Errc::kBadGrid: return "BadGrid";
    case Errc::kBadShape: return "BadShape";
    case Errc::kPatchLargerThanPlane: return "PatchLargerThanPlane";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kKOutOfRange: return "KOutOfRange";
    case Errc::kSingleClassInput: return "SingleClassInput";
    case Errc::kClassTooSmall: return "ClassTooSmall";
    case Errc::kInsufficientClassSize: return "InsufficientClassSize";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kConfig: return "Config";
    case Errc::kManifest: return "Manifest";
    case Errc::kModelFormat: return "ModelFormat";
    case Errc::kIo: return "Io";
  }
  return "Unknown";
}

bool is_usage_error(Errc code) noexcept {
  return code == Errc::kConfig || code == Errc::kInvalidArgument;
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message),
      code_(code) {}

}  // namespace sonoclass
