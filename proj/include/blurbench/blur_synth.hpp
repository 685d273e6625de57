#pragma once

#include <map>
#include <vector>

#include "blurbench/image.hpp"

namespace blurbench {

/// One blur window: average the `level` consecutive frames starting at `start`.
/// level == 1 is the sharp convention (the window is a single frame).
struct BlurSpec {
  int level = 1;
  int start = 0;
};

/// Strictly increasing list of blur levels.
class BlurSchedule {
 public:
  explicit BlurSchedule(std::vector<int> levels);

  const std::vector<int>& levels() const noexcept { return levels_; }
  int max_level() const noexcept { return levels_.back(); }
  std::size_t size() const noexcept { return levels_.size(); }
  bool contains(int level) const noexcept;

 private:
  std::vector<int> levels_;
};

/// The benchmark's nine-level schedule: {1, 10, 20, 30, 40, 60, 80, 120, 240}.
BlurSchedule default_schedule();

/// Virtual exposure implied by a blur level at the source frame rate.
struct ExposureTime {
  double seconds = 0.0;
};

ExposureTime exposure_time(int level, double fps);

/// Averages exactly `spec.level` frames (indices start .. start+level-1) per
/// sample, in exact integer arithmetic with round-half-up quantization.
Image synthesize_blur(const FrameSequence& seq, const BlurSpec& spec);

/// Synthesizes one traverse: anchors at j = 0, stride, 2*stride, ... while
/// j + max_level <= n, every schedule level rendered at every anchor so places
/// are index-aligned across levels.
std::map<int, std::vector<Image>> synthesize_traverse(const FrameSequence& seq,
                                                      const BlurSchedule& schedule, int stride,
                                                      int max_level);

/// Same, with max_level = max(schedule).
std::map<int, std::vector<Image>> synthesize_traverse(const FrameSequence& seq,
                                                      const BlurSchedule& schedule, int stride);

/// Number of anchors a sequence of length n yields: floor((n - max_level)/stride) + 1.
std::size_t traverse_place_count(std::size_t sequence_length, int max_level, int stride);

}  // namespace blurbench
