// Stand-in deblurrer for tests and bridge demos: copies every file from the
// input directory to the output directory. Flags simulate failure modes.
//
//   mock_deblur <in_dir> <out_dir> [--fail] [--drop N] [--sleep-ms M] [--shrink]
//
//   --fail       exit with a nonzero code after doing nothing
//   --drop N     omit the first N outputs (sorted by name)
//   --sleep-ms M sleep before processing, to trip bridge timeouts
//   --shrink     crop outputs by one pixel so dimensions stop matching

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "blurbench/image.hpp"
#include "blurbench/image_io.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: mock_deblur <in_dir> <out_dir> [--fail] [--drop N] [--sleep-ms M] "
                 "[--shrink]\n";
    return 2;
  }
  const fs::path in_dir = argv[1];
  const fs::path out_dir = argv[2];
  bool fail = false;
  bool shrink = false;
  int drop = 0;
  int sleep_ms = 0;
  for (int i = 3; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--fail") {
      fail = true;
    } else if (arg == "--shrink") {
      shrink = true;
    } else if (arg == "--drop" && i + 1 < argc) {
      drop = std::stoi(argv[++i]);
    } else if (arg == "--sleep-ms" && i + 1 < argc) {
      sleep_ms = std::stoi(argv[++i]);
    } else {
      std::cerr << "unknown argument: " << arg << "\n";
      return 2;
    }
  }

  if (sleep_ms > 0) {
    std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
  }
  if (fail) {
    return 3;
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    if (entry.is_regular_file()) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  for (std::size_t i = 0; i < files.size(); ++i) {
    if (static_cast<int>(i) < drop) {
      continue;
    }
    const fs::path out = out_dir / files[i].filename();
    if (shrink) {
      const blurbench::Image img = blurbench::load_image(files[i]);
      if (img.width() < 2) {
        return 4;
      }
      std::vector<std::uint8_t> cropped;
      cropped.reserve(static_cast<std::size_t>(img.width() - 1) * img.height() * img.channels());
      for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width() - 1; ++x) {
          for (int c = 0; c < img.channels(); ++c) {
            cropped.push_back(img.at(y, x, c));
          }
        }
      }
      blurbench::save_png(
          blurbench::Image(img.width() - 1, img.height(), img.channels(), std::move(cropped)),
          out);
    } else {
      fs::copy_file(files[i], out, fs::copy_options::overwrite_existing, ec);
      if (ec) {
        std::cerr << "copy failed: " << ec.message() << "\n";
        return 1;
      }
    }
  }
  return 0;
}
