#include "blurbench/blur_synth.hpp"

#include <algorithm>
#include <string>

namespace blurbench {

BlurSchedule::BlurSchedule(std::vector<int> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) {
    raise(Errc::BadArgument, "schedule must name at least one level");
  }
  int prev = 0;
  for (int level : levels_) {
    if (level < 1) {
      raise(Errc::BadArgument, "blur level must be >= 1, got " + std::to_string(level));
    }
    if (level <= prev) {
      raise(Errc::BadArgument, "schedule levels must be strictly increasing");
    }
    prev = level;
  }
}

bool BlurSchedule::contains(int level) const noexcept {
  return std::binary_search(levels_.begin(), levels_.end(), level);
}

BlurSchedule default_schedule() { return BlurSchedule({1, 10, 20, 30, 40, 60, 80, 120, 240}); }

ExposureTime exposure_time(int level, double fps) {
  if (level < 1 || !(fps > 0.0)) {
    raise(Errc::BadArgument, "exposure_time needs level >= 1 and fps > 0");
  }
  return ExposureTime{static_cast<double>(level) / fps};
}

Image synthesize_blur(const FrameSequence& seq, const BlurSpec& spec) {
  const std::size_t n = seq.size();
  if (spec.level < 1 || spec.start < 0 ||
      static_cast<std::size_t>(spec.start) + static_cast<std::size_t>(spec.level) > n) {
    raise(Errc::WindowOutOfRange,
          "window [" + std::to_string(spec.start) + ", " +
              std::to_string(spec.start + spec.level) + ") exceeds sequence of length " +
              std::to_string(n));
  }

  const Image& first = seq.frame(static_cast<std::size_t>(spec.start));
  if (spec.level == 1) {
    return first;
  }

  const std::size_t samples = first.pixels().size();
  std::vector<std::uint64_t> sums(samples, 0);
  for (int i = 0; i < spec.level; ++i) {
    const auto src = seq.frame(static_cast<std::size_t>(spec.start + i)).pixels();
    for (std::size_t s = 0; s < samples; ++s) {
      sums[s] += src[s];
    }
  }

  const std::uint64_t level = static_cast<std::uint64_t>(spec.level);
  const std::uint64_t half = level / 2;
  std::vector<std::uint8_t> out(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    out[s] = static_cast<std::uint8_t>((sums[s] + half) / level);
  }
  return Image(first.width(), first.height(), first.channels(), std::move(out));
}

std::size_t traverse_place_count(std::size_t sequence_length, int max_level, int stride) {
  if (stride < 1 || max_level < 1 || sequence_length < static_cast<std::size_t>(max_level)) {
    return 0;
  }
  return (sequence_length - static_cast<std::size_t>(max_level)) /
             static_cast<std::size_t>(stride) +
         1;
}

std::map<int, std::vector<Image>> synthesize_traverse(const FrameSequence& seq,
                                                      const BlurSchedule& schedule, int stride,
                                                      int max_level) {
  if (stride < 1) {
    raise(Errc::BadArgument, "stride must be >= 1");
  }
  if (max_level < schedule.max_level()) {
    raise(Errc::BadArgument, "max_level must cover the largest schedule level");
  }
  const std::size_t n = seq.size();
  if (n < static_cast<std::size_t>(max_level)) {
    raise(Errc::SequenceTooShort, "sequence of " + std::to_string(n) +
                                      " frames cannot host windows of " +
                                      std::to_string(max_level));
  }

  std::map<int, std::vector<Image>> result;
  const std::size_t places = traverse_place_count(n, max_level, stride);
  for (int level : schedule.levels()) {
    auto& images = result[level];
    images.reserve(places);
    for (std::size_t p = 0; p < places; ++p) {
      const int anchor = static_cast<int>(p * static_cast<std::size_t>(stride));
      images.push_back(synthesize_blur(seq, BlurSpec{level, anchor}));
    }
  }
  return result;
}

std::map<int, std::vector<Image>> synthesize_traverse(const FrameSequence& seq,
                                                      const BlurSchedule& schedule, int stride) {
  return synthesize_traverse(seq, schedule, stride, schedule.max_level());
}

}  // namespace blurbench
