#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <stdlib.h>
#include <unistd.h>

#include "blurbench/image.hpp"
#include "blurbench/rng.hpp"

namespace testutil {

/// Directory holding the current executable (test binaries and the CLI land
/// in the same bin/ directory).
inline std::filesystem::path own_dir() {
  return std::filesystem::read_symlink("/proc/self/exe").parent_path();
}

struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag = "blurbench-test") {
    std::string templ = (std::filesystem::temp_directory_path() / (tag + "-XXXXXX")).string();
    if (mkdtemp(templ.data()) == nullptr) {
      throw std::runtime_error("mkdtemp failed");
    }
    path = templ;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

/// Uniform byte from the LCG's high bits (the low bits of a power-of-two LCG
/// cycle with tiny periods, which would imprint them onto generated textures).
inline std::uint8_t random_byte(blurbench::Lcg64& rng) {
  return static_cast<std::uint8_t>(rng.next() >> 56);
}

inline blurbench::Image random_image(int w, int h, int ch, blurbench::Lcg64& rng) {
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h * ch);
  for (auto& p : pixels) {
    p = random_byte(rng);
  }
  return blurbench::Image(w, h, ch, std::move(pixels));
}

/// Gray noise smoothed with two box-blur passes and stretched back to the
/// full 8-bit range, so it carries spatial structure at the ~10 px scale.
inline blurbench::Image smoothed_noise(int w, int h, std::uint64_t seed, int radius = 4) {
  blurbench::Lcg64 rng(seed);
  std::vector<double> buf(static_cast<std::size_t>(w) * h);
  for (auto& v : buf) {
    v = static_cast<double>(random_byte(rng));
  }

  std::vector<double> tmp(buf.size());
  for (int pass = 0; pass < 2; ++pass) {
    // horizontal
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double sum = 0.0;
        int count = 0;
        for (int dx = -radius; dx <= radius; ++dx) {
          const int xx = x + dx;
          if (xx >= 0 && xx < w) {
            sum += buf[static_cast<std::size_t>(y) * w + xx];
            ++count;
          }
        }
        tmp[static_cast<std::size_t>(y) * w + x] = sum / count;
      }
    }
    // vertical
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double sum = 0.0;
        int count = 0;
        for (int dy = -radius; dy <= radius; ++dy) {
          const int yy = y + dy;
          if (yy >= 0 && yy < h) {
            sum += tmp[static_cast<std::size_t>(yy) * w + x];
            ++count;
          }
        }
        buf[static_cast<std::size_t>(y) * w + x] = sum / count;
      }
    }
  }

  double lo = buf[0], hi = buf[0];
  for (double v : buf) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  std::vector<std::uint8_t> pixels(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    pixels[i] = blurbench::quantize_u8((buf[i] - lo) * scale);
  }
  return blurbench::Image(w, h, 1, std::move(pixels));
}

/// Camera panning over a wide smoothed-noise texture: frame i is the
/// frame_w x frame_h window starting at column i*step.
inline blurbench::FrameSequence panning_sequence(int frame_w, int frame_h, int n_frames, int step,
                                                 std::uint64_t seed, double fps = 240.0) {
  const int texture_w = frame_w + step * (n_frames - 1);
  const blurbench::Image texture = smoothed_noise(texture_w, frame_h, seed);

  std::vector<blurbench::Image> frames;
  frames.reserve(static_cast<std::size_t>(n_frames));
  for (int i = 0; i < n_frames; ++i) {
    const int x0 = i * step;
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(frame_w) * frame_h);
    for (int y = 0; y < frame_h; ++y) {
      for (int x = 0; x < frame_w; ++x) {
        pixels[static_cast<std::size_t>(y) * frame_w + x] = texture.at(y, x0 + x);
      }
    }
    frames.emplace_back(frame_w, frame_h, 1, std::move(pixels));
  }
  return blurbench::FrameSequence(std::move(frames), fps, "synthetic-pan");
}

}  // namespace testutil
