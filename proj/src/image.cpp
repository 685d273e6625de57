#include "blurbench/image.hpp"

#include <utility>

namespace blurbench {

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  if (width_ < 1 || height_ < 1) {
    raise(Errc::BadImage, "image dimensions must be at least 1x1");
  }
  if (channels_ != 1 && channels_ != 3) {
    raise(Errc::BadImage, "channel count must be 1 or 3, got " + std::to_string(channels_));
  }
  const auto expected = static_cast<std::size_t>(width_) * height_ * channels_;
  if (pixels_.size() != expected) {
    raise(Errc::BadImage, "pixel buffer holds " + std::to_string(pixels_.size()) +
                              " samples, expected " + std::to_string(expected));
  }
}

Image Image::filled(int width, int height, int channels, std::uint8_t value) {
  if (width < 1 || height < 1 || (channels != 1 && channels != 3)) {
    raise(Errc::BadImage, "invalid shape for filled image");
  }
  return Image(width, height, channels,
               std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * channels, value));
}

FrameSequence::FrameSequence(std::vector<Image> frames, double fps, std::string source_id)
    : frames_(std::move(frames)), fps_(fps), source_id_(std::move(source_id)) {
  if (frames_.empty()) {
    raise(Errc::NoFrames, "frame sequence must hold at least one frame");
  }
  if (!(fps_ > 0.0)) {
    raise(Errc::BadArgument, "fps must be positive");
  }
  for (std::size_t i = 1; i < frames_.size(); ++i) {
    if (!frames_[i].same_shape(frames_[0])) {
      raise(Errc::InconsistentFrames,
            "frame " + std::to_string(i) + " differs in shape from frame 0");
    }
  }
}

Image to_grayscale(const Image& img) {
  if (img.channels() == 1) {
    return img;
  }
  const auto src = img.pixels();
  std::vector<std::uint8_t> gray(static_cast<std::size_t>(img.width()) * img.height());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const std::size_t base = i * 3;
    const double luma =
        0.299 * src[base] + 0.587 * src[base + 1] + 0.114 * src[base + 2];
    gray[i] = quantize_u8(luma);
  }
  return Image(img.width(), img.height(), 1, std::move(gray));
}

Image downsample_box(const Image& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1 || out_w > img.width() || out_h > img.height()) {
    raise(Errc::BadResize, "output " + std::to_string(out_w) + "x" + std::to_string(out_h) +
                               " must be at least 1x1 and no larger than the input");
  }
  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();

  // Input pixel x (center x+0.5) lands in output cell floor((2x+1)*out/(2*in)).
  std::vector<int> col_cell(static_cast<std::size_t>(w));
  for (int x = 0; x < w; ++x) {
    col_cell[x] = static_cast<int>((2LL * x + 1) * out_w / (2LL * w));
  }
  std::vector<int> row_cell(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    row_cell[y] = static_cast<int>((2LL * y + 1) * out_h / (2LL * h));
  }

  const std::size_t cells = static_cast<std::size_t>(out_w) * out_h;
  std::vector<std::uint64_t> sums(cells * ch, 0);
  std::vector<std::uint64_t> counts(cells, 0);
  const auto src = img.pixels();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t cell = static_cast<std::size_t>(row_cell[y]) * out_w + col_cell[x];
      ++counts[cell];
      const std::size_t base = (static_cast<std::size_t>(y) * w + x) * ch;
      for (int c = 0; c < ch; ++c) {
        sums[cell * ch + c] += src[base + c];
      }
    }
  }

  std::vector<std::uint8_t> out(cells * ch);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const std::uint64_t n = counts[cell];
    for (int c = 0; c < ch; ++c) {
      // round-half-up integer mean: floor(sum/n + 1/2)
      out[cell * ch + c] = static_cast<std::uint8_t>((2 * sums[cell * ch + c] + n) / (2 * n));
    }
  }
  return Image(out_w, out_h, ch, std::move(out));
}

}  // namespace blurbench
