#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "blurbench/image.hpp"

namespace blurbench {

struct BlurScore {
  double variance = 0.0;
  std::string image_id;
};

struct CalibrationInfo {
  std::size_t sharp_samples = 0;
  std::size_t blurred_samples = 0;
  std::size_t misclassified = 0;
  bool warning = false;  // set when no cutoff separates the populations
};

struct Threshold {
  double cutoff = 0.0;
  CalibrationInfo calibration;
};

/// Variance of the 4-neighbor Laplacian response over interior pixels
/// (valid convolution, no padding). Low variance indicates blur.
BlurScore laplacian_variance(const Image& img, std::string image_id = "");

enum class Sharpness { Sharp, Blurred };

/// Sharp iff variance >= cutoff (the boundary counts as sharp).
Sharpness classify(const BlurScore& score, const Threshold& threshold);

/// Picks the midpoint between adjacent distinct scores that minimizes
/// training misclassifications; ties resolve to the lowest cutoff.
Threshold calibrate_threshold(const std::vector<double>& sharp_scores,
                              const std::vector<double>& blurred_scores);

void save_threshold(const Threshold& threshold, const std::filesystem::path& path);
Threshold load_threshold(const std::filesystem::path& path);

}  // namespace blurbench
