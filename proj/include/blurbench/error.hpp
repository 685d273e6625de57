#pragma once

#include <stdexcept>
#include <string>

namespace blurbench {

enum class Errc {
  // imaging
  NoFrames,
  InconsistentFrames,
  BadFrameName,
  BadImage,
  BadResize,
  // blur synthesis
  WindowOutOfRange,
  SequenceTooShort,
  BadArgument,
  // dataset
  LevelUnavailable,
  BadGroundTruth,
  BadManifest,
  MissingImage,
  // descriptors
  BadConfig,
  BadDimensions,
  BadFormat,
  Truncated,
  // evaluation
  NoGroundTruth,
  EmptyCurve,
  // blur detection
  TooSmall,
  BadCalibration,
  // adaptive pipeline
  DeblurFailed,
  IncompleteOutput,
  BadOutput,
  Timeout,
  BadPowerLog,
  // filesystem / OS failures outside the contracts above
  Io,
};

const char* to_string(Errc code) noexcept;

/// Exception carrying one of the toolkit's named error codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void raise(Errc code, const std::string& message);

}  // namespace blurbench
