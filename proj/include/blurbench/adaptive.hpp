#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "blurbench/blur_detect.hpp"
#include "blurbench/dataset.hpp"
#include "blurbench/descriptors.hpp"
#include "blurbench/evaluation.hpp"
#include "blurbench/image.hpp"

namespace blurbench {

/// External deblurrer contract: the command template is run shell-free with
/// {in_dir}/{out_dir} substituted; it must write one same-named, same-sized
/// output per input file and exit 0.
struct DeblurBridge {
  std::string command;
  double timeout_s = 300.0;
  int batch_size = 16;
};

void validate_bridge(const DeblurBridge& bridge);

/// Stages the batch into a temp directory, runs the bridge once, loads the
/// outputs back in input order.
std::vector<Image> invoke_deblurrer(const DeblurBridge& bridge, const std::vector<Image>& images);

enum class PipelineMode { NoDeblur, AllDeblur, DetectDeblur };

PipelineMode mode_from_string(const std::string& name);
const char* to_string(PipelineMode mode) noexcept;

struct PipelineConfig {
  PipelineMode mode = PipelineMode::NoDeblur;
  std::optional<Threshold> threshold;   // required for DetectDeblur
  std::optional<DeblurBridge> bridge;   // required unless NoDeblur
  Metric metric = Metric::NegMad;
  SadConfig sad;
  std::vector<std::pair<double, double>> power_log;  // (timestamp_s, watts)
};

struct PipelineStats {
  PipelineMode mode = PipelineMode::NoDeblur;
  std::size_t query_count = 0;
  std::size_t deblur_invocations = 0;  // images sent through the bridge
  std::size_t detected_blurred = 0;
  double time_per_query_ms = 0.0;  // mean over per-query load+detect+deblur+describe
  double total_time_s = 0.0;
  std::optional<double> energy_j;
  std::optional<double> auc;
  double wall_start_s = 0.0;  // unix epoch, for external power-log alignment
  double wall_end_s = 0.0;

  nlohmann::json to_json() const;
};

/// Bridge failure mid-run: carries partial stats and the query being
/// processed when the pipeline aborted.
class PipelineError : public Error {
 public:
  PipelineError(Errc code, const std::string& message, PipelineStats partial,
                std::size_t failing_query);

  const PipelineStats& partial_stats() const noexcept { return partial_; }
  std::size_t failing_query() const noexcept { return failing_query_; }

 private:
  PipelineStats partial_;
  std::size_t failing_query_;
};

/// Runs one strategy over a mixed-blur query sequence: load each query image
/// from the traverse, optionally detect/deblur, describe with SAD, then
/// evaluate against the sharp reference set.
std::pair<EvalResult, PipelineStats> run_pipeline(const Traverse& traverse,
                                                  const MixSequence& mix,
                                                  const DescriptorSet& reference,
                                                  const GroundTruth& gt,
                                                  const PipelineConfig& cfg);

/// Trapezoidal integral of watts over [t0, t1] with linear interpolation at
/// the boundaries; nullopt when the log is empty or does not cover the window.
std::optional<double> integrate_energy(const std::vector<std::pair<double, double>>& power_log,
                                       double t0, double t1);

/// CSV rows "timestamp_s,watts"; an optional header line is skipped.
std::vector<std::pair<double, double>> load_power_log(const std::filesystem::path& path);

}  // namespace blurbench
