#include "blurbench/adaptive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <stdlib.h>

#include "blurbench/image_io.hpp"
#include "blurbench/process.hpp"

namespace blurbench {

namespace fs = std::filesystem;
using nlohmann::json;

void validate_bridge(const DeblurBridge& bridge) {
  if (bridge.command.find("{in_dir}") == std::string::npos ||
      bridge.command.find("{out_dir}") == std::string::npos) {
    raise(Errc::BadConfig, "bridge command must contain {in_dir} and {out_dir}");
  }
  if (!(bridge.timeout_s > 0.0)) {
    raise(Errc::BadConfig, "bridge timeout must be positive");
  }
  if (bridge.batch_size < 1) {
    raise(Errc::BadConfig, "bridge batch size must be >= 1");
  }
}

namespace {

struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    std::string templ = (fs::temp_directory_path() / (tag + "-XXXXXX")).string();
    if (mkdtemp(templ.data()) == nullptr) {
      raise(Errc::Io, "cannot create temp directory for " + tag);
    }
    path = templ;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

std::string replace_all(std::string text, const std::string& needle, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

std::string batch_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06zu.png", i);
  return buf;
}

double unix_now_s() {
  return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::vector<Image> invoke_deblurrer(const DeblurBridge& bridge, const std::vector<Image>& images) {
  validate_bridge(bridge);
  if (images.empty()) {
    raise(Errc::BadArgument, "deblur batch must not be empty");
  }

  TempDir staging("blurbench-bridge");
  const fs::path in_dir = staging.path / "in";
  const fs::path out_dir = staging.path / "out";
  fs::create_directories(in_dir);
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < images.size(); ++i) {
    save_png(images[i], in_dir / batch_name(i));
  }

  std::vector<std::string> argv = split_command(bridge.command);
  for (auto& token : argv) {
    token = replace_all(token, "{in_dir}", in_dir.string());
    token = replace_all(token, "{out_dir}", out_dir.string());
  }

  const CommandResult result = run_command(argv, bridge.timeout_s);
  if (result.timed_out) {
    raise(Errc::Timeout, "deblurrer exceeded " + std::to_string(bridge.timeout_s) + " s");
  }
  if (result.exit_code != 0) {
    raise(Errc::DeblurFailed, "deblurrer exited with code " + std::to_string(result.exit_code));
  }

  std::vector<Image> outputs;
  outputs.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const fs::path out_file = out_dir / batch_name(i);
    if (!fs::exists(out_file)) {
      raise(Errc::IncompleteOutput, "deblurrer produced no output for " + batch_name(i));
    }
    Image out = load_image(out_file);
    if (!out.same_shape(images[i])) {
      raise(Errc::BadOutput, "deblurrer changed dimensions of " + batch_name(i));
    }
    outputs.push_back(std::move(out));
  }
  return outputs;
}

PipelineMode mode_from_string(const std::string& name) {
  if (name == "no-deblur") return PipelineMode::NoDeblur;
  if (name == "all-deblur") return PipelineMode::AllDeblur;
  if (name == "detect-deblur") return PipelineMode::DetectDeblur;
  raise(Errc::BadArgument,
        "unknown mode '" + name + "' (expected no-deblur, all-deblur or detect-deblur)");
}

const char* to_string(PipelineMode mode) noexcept {
  switch (mode) {
    case PipelineMode::NoDeblur: return "no-deblur";
    case PipelineMode::AllDeblur: return "all-deblur";
    case PipelineMode::DetectDeblur: return "detect-deblur";
  }
  return "?";
}

json PipelineStats::to_json() const {
  json doc;
  doc["mode"] = to_string(mode);
  doc["query_count"] = query_count;
  doc["deblur_invocations"] = deblur_invocations;
  doc["detected_blurred"] = detected_blurred;
  doc["time_per_query_ms"] = std::round(time_per_query_ms * 100.0) / 100.0;
  doc["total_time_s"] = total_time_s;
  doc["energy_j"] = energy_j ? json(*energy_j) : json(nullptr);
  doc["auc"] = auc ? json(*auc) : json(nullptr);
  doc["wall_start_s"] = wall_start_s;
  doc["wall_end_s"] = wall_end_s;
  return doc;
}

PipelineError::PipelineError(Errc code, const std::string& message, PipelineStats partial,
                             std::size_t failing_query)
    : Error(code, message + " (query " + std::to_string(failing_query) + ")"),
      partial_(std::move(partial)),
      failing_query_(failing_query) {}

std::pair<EvalResult, PipelineStats> run_pipeline(const Traverse& traverse,
                                                  const MixSequence& mix,
                                                  const DescriptorSet& reference,
                                                  const GroundTruth& gt,
                                                  const PipelineConfig& cfg) {
  if (mix.entries.empty()) {
    raise(Errc::BadArgument, "mix sequence is empty");
  }
  if (cfg.mode == PipelineMode::DetectDeblur && !cfg.threshold) {
    raise(Errc::BadConfig, "detect-deblur needs a calibrated threshold");
  }
  if (cfg.mode != PipelineMode::NoDeblur) {
    if (!cfg.bridge) {
      raise(Errc::BadConfig, "deblurring modes need a bridge command");
    }
    validate_bridge(*cfg.bridge);
  }

  using clock = std::chrono::steady_clock;
  const auto elapsed_ms = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  PipelineStats stats;
  stats.mode = cfg.mode;
  stats.query_count = mix.entries.size();
  stats.wall_start_s = unix_now_s();
  const auto run_start = clock::now();

  struct QueryState {
    Image image = Image::filled(1, 1, 1, 0);
    std::string source;
    bool deblur = false;
    double ms = 0.0;
  };
  std::vector<QueryState> queries;
  queries.reserve(mix.entries.size());

  std::size_t current_query = 0;
  std::vector<Descriptor> described;
  try {
    // load + detect
    for (std::size_t k = 0; k < mix.entries.size(); ++k) {
      current_query = k;
      const MixEntry& entry = mix.entries[k];
      const auto t0 = clock::now();
      QueryState state;
      const fs::path src = traverse.resolve_path(entry.level, entry.place);
      state.image = load_image(src);
      state.source = src.string();
      switch (cfg.mode) {
        case PipelineMode::NoDeblur:
          break;
        case PipelineMode::AllDeblur:
          state.deblur = true;
          break;
        case PipelineMode::DetectDeblur: {
          const BlurScore score = laplacian_variance(state.image, state.source);
          if (classify(score, *cfg.threshold) == Sharpness::Blurred) {
            state.deblur = true;
            ++stats.detected_blurred;
          }
          break;
        }
      }
      state.ms = elapsed_ms(t0);
      queries.push_back(std::move(state));
    }

    // deblur in batches; batch wall time is shared equally by its members
    if (cfg.mode != PipelineMode::NoDeblur) {
      std::vector<std::size_t> pending;
      for (std::size_t k = 0; k < queries.size(); ++k) {
        if (queries[k].deblur) {
          pending.push_back(k);
        }
      }
      const std::size_t batch = static_cast<std::size_t>(cfg.bridge->batch_size);
      for (std::size_t begin = 0; begin < pending.size(); begin += batch) {
        const std::size_t end = std::min(begin + batch, pending.size());
        current_query = pending[begin];
        std::vector<Image> inputs;
        inputs.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
          inputs.push_back(queries[pending[i]].image);
        }
        const auto t0 = clock::now();
        std::vector<Image> outputs = invoke_deblurrer(*cfg.bridge, inputs);
        const double share = elapsed_ms(t0) / static_cast<double>(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
          queries[pending[i]].image = std::move(outputs[i - begin]);
          queries[pending[i]].ms += share;
        }
        stats.deblur_invocations += end - begin;
      }
    }

    // describe
    described.reserve(queries.size());
    for (std::size_t k = 0; k < queries.size(); ++k) {
      current_query = k;
      const auto t0 = clock::now();
      Descriptor d = extract_sad(queries[k].image, cfg.sad);
      d.place = mix.entries[k].place;
      d.level = mix.entries[k].level;
      d.source = queries[k].source;
      described.push_back(std::move(d));
      queries[k].ms += elapsed_ms(t0);
    }
  } catch (const Error& e) {
    stats.total_time_s = elapsed_ms(run_start) / 1000.0;
    stats.wall_end_s = unix_now_s();
    double total_ms = 0.0;
    for (const auto& q : queries) {
      total_ms += q.ms;
    }
    stats.time_per_query_ms = queries.empty() ? 0.0 : total_ms / static_cast<double>(queries.size());
    throw PipelineError(e.code(), e.what(), std::move(stats), current_query);
  }

  stats.total_time_s = elapsed_ms(run_start) / 1000.0;
  stats.wall_end_s = unix_now_s();
  double total_ms = 0.0;
  for (const auto& q : queries) {
    total_ms += q.ms;
  }
  stats.time_per_query_ms = total_ms / static_cast<double>(queries.size());
  if (!cfg.power_log.empty()) {
    stats.energy_j = integrate_energy(cfg.power_log, stats.wall_start_s, stats.wall_end_s);
  }

  DescriptorSet query_set;
  query_set.method = "sad";
  query_set.dim = cfg.sad.down_w * cfg.sad.down_h;
  query_set.items = std::move(described);

  EvalResult result = evaluate(query_set, reference, cfg.metric, gt);
  stats.auc = result.auc;
  return {std::move(result), std::move(stats)};
}

std::optional<double> integrate_energy(const std::vector<std::pair<double, double>>& power_log,
                                       double t0, double t1) {
  if (t1 < t0) {
    raise(Errc::BadArgument, "integration window must have t0 <= t1");
  }
  for (std::size_t i = 1; i < power_log.size(); ++i) {
    if (!(power_log[i].first > power_log[i - 1].first)) {
      raise(Errc::BadPowerLog, "timestamps must be strictly increasing");
    }
  }
  if (power_log.empty() || power_log.front().first > t0 || power_log.back().first < t1) {
    return std::nullopt;  // log does not cover the window
  }

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < power_log.size(); ++i) {
    const auto& [ta, pa] = power_log[i];
    const auto& [tb, pb] = power_log[i + 1];
    const double lo = std::max(ta, t0);
    const double hi = std::min(tb, t1);
    if (hi <= lo) {
      continue;
    }
    const double slope = (pb - pa) / (tb - ta);
    const double p_lo = pa + slope * (lo - ta);
    const double p_hi = pa + slope * (hi - ta);
    total += (hi - lo) * (p_lo + p_hi) / 2.0;
  }
  return total;
}

std::vector<std::pair<double, double>> load_power_log(const fs::path& path) {
  if (!fs::exists(path)) {
    raise(Errc::BadPowerLog, "power log not found: " + path.string());
  }
  std::ifstream in(path);
  if (!in) {
    raise(Errc::Io, "cannot open " + path.string());
  }
  std::vector<std::pair<double, double>> log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    if (line_no == 1 && line.find("timestamp") != std::string::npos) {
      continue;  // header
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      raise(Errc::BadPowerLog,
            path.string() + ":" + std::to_string(line_no) + ": expected 'timestamp_s,watts'");
    }
    try {
      log.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      raise(Errc::BadPowerLog,
            path.string() + ":" + std::to_string(line_no) + ": expected 'timestamp_s,watts'");
    }
  }
  return log;
}

}  // namespace blurbench
