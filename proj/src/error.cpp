#include "blurbench/error.hpp"

namespace blurbench {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NoFrames: return "NoFrames";
    case Errc::InconsistentFrames: return "InconsistentFrames";
    case Errc::BadFrameName: return "BadFrameName";
    case Errc::BadImage: return "BadImage";
    case Errc::BadResize: return "BadResize";
    case Errc::WindowOutOfRange: return "WindowOutOfRange";
    case Errc::SequenceTooShort: return "SequenceTooShort";
    case Errc::BadArgument: return "BadArgument";
    case Errc::LevelUnavailable: return "LevelUnavailable";
    case Errc::BadGroundTruth: return "BadGroundTruth";
    case Errc::BadManifest: return "BadManifest";
    case Errc::MissingImage: return "MissingImage";
    case Errc::BadConfig: return "BadConfig";
    case Errc::BadDimensions: return "BadDimensions";
    case Errc::BadFormat: return "BadFormat";
    case Errc::Truncated: return "Truncated";
    case Errc::NoGroundTruth: return "NoGroundTruth";
    case Errc::EmptyCurve: return "EmptyCurve";
    case Errc::TooSmall: return "TooSmall";
    case Errc::BadCalibration: return "BadCalibration";
    case Errc::DeblurFailed: return "DeblurFailed";
    case Errc::IncompleteOutput: return "IncompleteOutput";
    case Errc::BadOutput: return "BadOutput";
    case Errc::Timeout: return "Timeout";
    case Errc::BadPowerLog: return "BadPowerLog";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void raise(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace blurbench
