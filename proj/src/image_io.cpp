#include "blurbench/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace blurbench {

namespace fs = std::filesystem;

namespace {

std::string lower_ext(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

bool is_supported_raster(const fs::path& path) {
  const std::string ext = lower_ext(path);
  return ext == ".png" || ext == ".ppm" || ext == ".pgm";
}

Image load_image(const fs::path& path) {
  if (!fs::exists(path)) {
    raise(Errc::MissingImage, "no such file: " + path.string());
  }
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) {
    raise(Errc::BadFormat, "cannot decode " + path.string());
  }
  if (mat.depth() != CV_8U) {
    raise(Errc::BadImage, "only 8-bit samples are supported: " + path.string());
  }
  const int ch = mat.channels();
  if (ch != 1 && ch != 3) {
    raise(Errc::BadImage,
          "unsupported channel count " + std::to_string(ch) + ": " + path.string());
  }

  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(mat.rows) * mat.cols * ch);
  for (int y = 0; y < mat.rows; ++y) {
    const std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    std::uint8_t* dst = pixels.data() + static_cast<std::size_t>(y) * mat.cols * ch;
    if (ch == 1) {
      std::memcpy(dst, row, static_cast<std::size_t>(mat.cols));
    } else {
      // OpenCV decodes as BGR
      for (int x = 0; x < mat.cols; ++x) {
        dst[x * 3 + 0] = row[x * 3 + 2];
        dst[x * 3 + 1] = row[x * 3 + 1];
        dst[x * 3 + 2] = row[x * 3 + 0];
      }
    }
  }
  return Image(mat.cols, mat.rows, ch, std::move(pixels));
}

void save_png(const Image& img, const fs::path& path) {
  const int ch = img.channels();
  cv::Mat mat(img.height(), img.width(), ch == 1 ? CV_8UC1 : CV_8UC3);
  const auto src = img.pixels();
  for (int y = 0; y < img.height(); ++y) {
    std::uint8_t* row = mat.ptr<std::uint8_t>(y);
    const std::uint8_t* s = src.data() + static_cast<std::size_t>(y) * img.width() * ch;
    if (ch == 1) {
      std::memcpy(row, s, static_cast<std::size_t>(img.width()));
    } else {
      for (int x = 0; x < img.width(); ++x) {
        row[x * 3 + 0] = s[x * 3 + 2];
        row[x * 3 + 1] = s[x * 3 + 1];
        row[x * 3 + 2] = s[x * 3 + 0];
      }
    }
  }
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  if (!cv::imwrite(path.string(), mat)) {
    raise(Errc::Io, "cannot write " + path.string());
  }
}

FrameSequence load_frame_sequence(const fs::path& directory, double fps) {
  if (!(fps > 0.0)) {
    raise(Errc::BadArgument, "fps must be positive");
  }
  if (!fs::is_directory(directory)) {
    raise(Errc::NoFrames, "not a directory: " + directory.string());
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() && is_supported_raster(entry.path())) {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    raise(Errc::NoFrames, "no raster frames in " + directory.string());
  }

  std::vector<std::string> stems(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    stems[i] = files[i].stem().string();
  }

  // Shared prefix = longest common prefix truncated at its first digit.
  std::string prefix = stems[0];
  for (const auto& stem : stems) {
    std::size_t k = 0;
    while (k < prefix.size() && k < stem.size() && prefix[k] == stem[k]) ++k;
    prefix.resize(k);
  }
  const auto first_digit = std::find_if(prefix.begin(), prefix.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
  prefix.erase(first_digit, prefix.end());

  std::map<std::uint64_t, fs::path> by_index;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const std::string digits = stems[i].substr(prefix.size());
    if (digits.empty() || digits.size() > 18 ||
        !std::all_of(digits.begin(), digits.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; })) {
      raise(Errc::BadFrameName, "frame stem '" + stems[i] + "' is not '" + prefix +
                                    "' followed by a decimal index");
    }
    std::uint64_t index = 0;
    std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (!by_index.emplace(index, files[i]).second) {
      raise(Errc::BadFrameName,
            "duplicate frame index " + std::to_string(index) + " in " + directory.string());
    }
  }

  std::vector<Image> frames;
  frames.reserve(by_index.size());
  for (const auto& [index, path] : by_index) {
    Image img = load_image(path);
    if (!frames.empty() && !img.same_shape(frames.front())) {
      raise(Errc::InconsistentFrames, path.string() + " differs in shape from earlier frames");
    }
    frames.push_back(std::move(img));
  }
  return FrameSequence(std::move(frames), fps, directory.filename().string());
}

}  // namespace blurbench
