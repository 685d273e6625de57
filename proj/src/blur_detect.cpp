#include "blurbench/blur_detect.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace blurbench {

using nlohmann::json;

BlurScore laplacian_variance(const Image& img, std::string image_id) {
  const Image gray = to_grayscale(img);
  const int w = gray.width();
  const int h = gray.height();
  if (w < 3 || h < 3) {
    raise(Errc::TooSmall, "blur scoring needs at least 3x3 pixels, got " + std::to_string(w) +
                              "x" + std::to_string(h));
  }

  const auto px = gray.pixels();
  const auto sample = [&](int y, int x) -> int {
    return px[static_cast<std::size_t>(y) * w + x];
  };

  double sum = 0.0;
  double sum_sq = 0.0;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const int response = sample(y - 1, x) + sample(y + 1, x) + sample(y, x - 1) +
                           sample(y, x + 1) - 4 * sample(y, x);
      sum += response;
      sum_sq += static_cast<double>(response) * response;
    }
  }
  const double count = static_cast<double>(w - 2) * (h - 2);
  const double mean = sum / count;
  const double variance = std::max(0.0, sum_sq / count - mean * mean);
  return BlurScore{variance, std::move(image_id)};
}

Sharpness classify(const BlurScore& score, const Threshold& threshold) {
  return score.variance >= threshold.cutoff ? Sharpness::Sharp : Sharpness::Blurred;
}

Threshold calibrate_threshold(const std::vector<double>& sharp_scores,
                              const std::vector<double>& blurred_scores) {
  if (sharp_scores.empty() || blurred_scores.empty()) {
    raise(Errc::BadCalibration, "both score lists must be non-empty");
  }

  std::vector<double> merged;
  merged.reserve(sharp_scores.size() + blurred_scores.size());
  merged.insert(merged.end(), sharp_scores.begin(), sharp_scores.end());
  merged.insert(merged.end(), blurred_scores.begin(), blurred_scores.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  std::vector<double> candidates;
  if (merged.size() == 1) {
    candidates.push_back(merged.front());  // degenerate: no midpoints exist
  } else {
    for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
      candidates.push_back((merged[i] + merged[i + 1]) / 2.0);
    }
  }

  const auto errors_at = [&](double cutoff) {
    std::size_t errors = 0;
    for (double s : sharp_scores) {
      if (s < cutoff) ++errors;
    }
    for (double b : blurred_scores) {
      if (b >= cutoff) ++errors;
    }
    return errors;
  };

  double best_cutoff = candidates.front();
  std::size_t best_errors = errors_at(best_cutoff);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const std::size_t errors = errors_at(candidates[i]);
    if (errors < best_errors) {  // ties keep the lowest cutoff
      best_errors = errors;
      best_cutoff = candidates[i];
    }
  }

  Threshold threshold;
  threshold.cutoff = best_cutoff;
  threshold.calibration = {sharp_scores.size(), blurred_scores.size(), best_errors,
                           best_errors > 0};
  return threshold;
}

void save_threshold(const Threshold& threshold, const std::filesystem::path& path) {
  json doc;
  doc["cutoff"] = threshold.cutoff;
  doc["calibration"] = {{"sharp_samples", threshold.calibration.sharp_samples},
                        {"blurred_samples", threshold.calibration.blurred_samples},
                        {"misclassified", threshold.calibration.misclassified},
                        {"warning", threshold.calibration.warning}};
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out || !(out << doc.dump(2) << '\n')) {
    raise(Errc::Io, "cannot write " + path.string());
  }
}

Threshold load_threshold(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    raise(Errc::BadConfig, "threshold file not found: " + path.string());
  }
  std::ifstream in(path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    raise(Errc::BadConfig, "not valid JSON: " + path.string());
  }
  try {
    Threshold threshold;
    threshold.cutoff = doc.at("cutoff").get<double>();
    if (threshold.cutoff < 0.0) {
      raise(Errc::BadConfig, path.string() + ": cutoff must be >= 0");
    }
    if (doc.contains("calibration")) {
      const json& c = doc["calibration"];
      threshold.calibration.sharp_samples = c.value("sharp_samples", 0u);
      threshold.calibration.blurred_samples = c.value("blurred_samples", 0u);
      threshold.calibration.misclassified = c.value("misclassified", 0u);
      threshold.calibration.warning = c.value("warning", false);
    }
    return threshold;
  } catch (const json::exception& e) {
    raise(Errc::BadConfig, path.string() + ": " + e.what());
  }
}

}  // namespace blurbench
