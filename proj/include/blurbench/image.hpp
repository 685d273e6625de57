#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blurbench/error.hpp"

namespace blurbench {

/// Round-half-up quantization to an 8-bit sample: floor(x + 0.5), clamped.
/// Used everywhere a real value becomes a pixel so results stay bit-stable.
inline std::uint8_t quantize_u8(double value) {
  const double r = std::floor(value + 0.5);
  if (r <= 0.0) return 0;
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

/// Immutable 8-bit raster image, 1 (gray) or 3 (RGB) channels, row-major.
/// All operations return new images; instances are safe to share across threads.
class Image {
 public:
  Image(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  static Image filled(int width, int height, int channels, std::uint8_t value);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }

  std::uint8_t at(int row, int col, int channel = 0) const {
    return pixels_[(static_cast<std::size_t>(row) * width_ + col) * channels_ + channel];
  }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  bool operator==(const Image& other) const = default;

 private:
  int width_;
  int height_;
  int channels_;
  std::vector<std::uint8_t> pixels_;
};

/// Ordered sequence of same-shaped frames with the source frame rate.
class FrameSequence {
 public:
  FrameSequence(std::vector<Image> frames, double fps, std::string source_id = "");

  const std::vector<Image>& frames() const noexcept { return frames_; }
  const Image& frame(std::size_t i) const { return frames_.at(i); }
  std::size_t size() const noexcept { return frames_.size(); }
  double fps() const noexcept { return fps_; }
  const std::string& source_id() const noexcept { return source_id_; }

 private:
  std::vector<Image> frames_;
  double fps_;
  std::string source_id_;
};

/// BT.601 luma conversion with round-half-up; 1-channel input is returned as-is.
Image to_grayscale(const Image& img);

/// Box (area-average) downsampling. Each output sample averages the input
/// pixels whose centers fall in its cell; cell boundaries at i*width/out_w.
Image downsample_box(const Image& img, int out_w, int out_h);

}  // namespace blurbench
