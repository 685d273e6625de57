// blurbench: synthesize motion-blurred place-recognition benchmarks, score
// them, and drive adaptive deblurring pipelines.

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "blurbench/adaptive.hpp"
#include "blurbench/blur_detect.hpp"
#include "blurbench/blur_synth.hpp"
#include "blurbench/dataset.hpp"
#include "blurbench/descriptors.hpp"
#include "blurbench/evaluation.hpp"
#include "blurbench/image_io.hpp"
#include "blurbench/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace blurbench;

namespace {

/// Command-line misuse detected after CLI11 parsing (exit code 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOpts {
  std::uint64_t seed = 0;
  int jobs = 1;
  bool json_errors = false;
  std::string config_file;
};

/// Values from --config <file> fill in flags the user did not pass.
class ConfigLayer {
 public:
  void load(const std::string& path) {
    if (path.empty()) {
      return;
    }
    if (!fs::exists(path)) {
      throw UsageError("config file not found: " + path);
    }
    std::ifstream in(path);
    doc_ = json::parse(in, nullptr, false);
    if (doc_.is_discarded() || !doc_.is_object()) {
      throw UsageError("config file must hold a JSON object: " + path);
    }
  }

  void select(const std::string& subcommand) {
    section_ = doc_.contains(subcommand) && doc_[subcommand].is_object() ? doc_[subcommand]
                                                                         : json::object();
  }

  template <typename T>
  void fill(const CLI::Option* opt, T& value, const std::string& key) const {
    if (opt != nullptr && opt->count() > 0) {
      return;  // explicit flags win
    }
    if (section_.contains(key)) {
      try {
        value = section_.at(key).get<T>();
      } catch (const json::exception&) {
        throw UsageError("config key '" + key + "' has the wrong type");
      }
    }
  }

 private:
  json doc_ = json::object();
  json section_ = json::object();
};

void write_run_record(const fs::path& target, const std::string& subcommand,
                      const GlobalOpts& global, const json& resolved) {
  json record;
  record["subcommand"] = subcommand;
  record["seed"] = global.seed;
  record["jobs"] = global.jobs;
  record["options"] = resolved;
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  std::ofstream out(target);
  out << record.dump(2) << '\n';
}

fs::path run_record_for_file(const fs::path& output_file) {
  fs::path p = output_file;
  p += ".run.json";
  return p;
}

std::vector<int> parse_level_list(const std::string& text) {
  std::vector<int> levels;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) {
      levels.push_back(std::stoi(item));
    }
  }
  return levels;
}

std::map<int, double> parse_proportions(const std::string& text) {
  std::map<int, double> props;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw UsageError("proportions must look like 'level:fraction,...'");
    }
    props[std::stoi(item.substr(0, colon))] = std::stod(item.substr(colon + 1));
  }
  if (props.empty()) {
    throw UsageError("no proportions given");
  }
  return props;
}

std::set<std::string> parse_tags(const std::string& text) {
  std::set<std::string> tags;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) {
      tags.insert(item);
    }
  }
  return tags;
}

std::string level_dir_name(int level) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%03d", level);
  return buf;
}

std::string place_file_name(std::size_t place) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu.png", place);
  return buf;
}

/// Rewrites a user-supplied path so it resolves from new_base; relative
/// results keep the written manifest relocatable.
std::string rebase_path(const std::string& original, const fs::path& new_base) {
  std::error_code ec;
  const fs::path rel = fs::relative(fs::absolute(original), fs::absolute(new_base), ec);
  return (ec || rel.empty()) ? fs::absolute(original).string() : rel.string();
}

DescriptorSet describe_traverse_level(const Traverse& traverse, int level, const SadConfig& sad,
                                      int jobs) {
  DescriptorSet set;
  set.method = "sad";
  set.dim = sad.down_w * sad.down_h;
  set.items.resize(static_cast<std::size_t>(traverse.place_count()));
  parallel_for(set.items.size(), jobs, [&](std::size_t p) {
    const int place = static_cast<int>(p);
    Descriptor d = extract_sad(load_image(traverse.resolve_path(level, place)), sad);
    d.place = place;
    d.level = level;
    d.source = traverse.path_at(level, place);
    set.items[p] = std::move(d);
  });
  return set;
}

// --- synth ---

struct SynthOpts {
  std::string frames_dir;
  double fps = 240.0;
  std::string out_dir;
  std::string name;
  std::string route = "custom";
  std::string conditions;
  std::string levels = "1,10,20,30,40,60,80,120,240";
  int stride = 0;     // 0: default to max level
  int max_level = 0;  // 0: default to max schedule level
};

int cmd_synth(const SynthOpts& opt, const GlobalOpts& global) {
  if (opt.frames_dir.empty() || opt.out_dir.empty()) {
    throw UsageError("synth needs --frames and --out");
  }
  const BlurSchedule schedule(parse_level_list(opt.levels));
  const int max_level = opt.max_level > 0 ? opt.max_level : schedule.max_level();
  const int stride = opt.stride > 0 ? opt.stride : max_level;
  const std::string name =
      opt.name.empty() ? fs::path(opt.frames_dir).filename().string() : opt.name;

  const FrameSequence seq = load_frame_sequence(opt.frames_dir, opt.fps);
  const std::size_t places = traverse_place_count(seq.size(), max_level, stride);

  const fs::path root = fs::path(opt.out_dir) / name;

  // synthesize and write per (level, place); tasks are independent
  struct Task {
    int level;
    std::size_t place;
  };
  std::vector<Task> tasks;
  for (int level : schedule.levels()) {
    for (std::size_t p = 0; p < places; ++p) {
      tasks.push_back({level, p});
    }
  }
  if (tasks.empty()) {
    raise(Errc::SequenceTooShort, "sequence yields no places at max level " +
                                      std::to_string(max_level) + " with stride " +
                                      std::to_string(stride));
  }
  for (int level : schedule.levels()) {
    fs::create_directories(root / level_dir_name(level));
  }
  parallel_for(tasks.size(), global.jobs, [&](std::size_t t) {
    const auto [level, place] = tasks[t];
    const int anchor = static_cast<int>(place) * stride;
    const Image img = synthesize_blur(seq, BlurSpec{level, anchor});
    save_png(img, root / level_dir_name(level) / place_file_name(place));
  });

  std::vector<PlaceRef> refs;
  for (int level : schedule.levels()) {
    for (std::size_t p = 0; p < places; ++p) {
      refs.push_back({static_cast<int>(p), level,
                      level_dir_name(level) + "/" + place_file_name(p)});
    }
  }
  const Traverse traverse(name, opt.route, parse_tags(opt.conditions), opt.fps, std::move(refs));
  save_traverse_manifest(traverse, root / "manifest.json");

  json resolved{{"frames", opt.frames_dir}, {"fps", opt.fps},       {"out", opt.out_dir},
                {"name", name},             {"route", opt.route},   {"conditions", opt.conditions},
                {"levels", opt.levels},     {"stride", stride},     {"max_level", max_level}};
  write_run_record(root / "run_record.json", "synth", global, resolved);

  std::cout << "wrote " << tasks.size() << " images (" << schedule.size() << " levels x "
            << places << " places) under " << root.string() << "\n";
  return 0;
}

// --- dataset pair / dataset mix ---

struct PairOpts {
  std::string query_manifest;
  int query_level = 1;
  std::string reference_manifest;
  int reference_level = 1;
  bool gt_identity = false;
  std::string gt_file;
  int tolerance = 1;
  std::string name;
  std::string out;
};

int cmd_dataset_pair(const PairOpts& opt, const GlobalOpts& global) {
  if (opt.query_manifest.empty() || opt.reference_manifest.empty() || opt.out.empty()) {
    throw UsageError("dataset pair needs --query, --reference and --out");
  }
  if (opt.gt_identity == !opt.gt_file.empty()) {
    throw UsageError("choose exactly one of --gt-identity or --gt-file");
  }

  const fs::path out(opt.out);
  const fs::path base = out.has_parent_path() ? out.parent_path() : fs::path(".");
  PairManifest manifest;
  manifest.name = opt.name;
  manifest.query_manifest = rebase_path(opt.query_manifest, base);
  manifest.query_level = opt.query_level;
  manifest.reference_manifest = rebase_path(opt.reference_manifest, base);
  manifest.reference_level = opt.reference_level;
  manifest.ground_truth.tolerance = opt.tolerance;
  manifest.ground_truth.identity = opt.gt_identity;
  if (!opt.gt_file.empty()) {
    manifest.ground_truth.file = rebase_path(opt.gt_file, base);
  }

  const DatasetPair pair = resolve_pair(manifest, base);  // validates now
  save_pair_manifest(manifest, out);

  json resolved{{"query", opt.query_manifest},
                {"query_level", opt.query_level},
                {"reference", opt.reference_manifest},
                {"reference_level", opt.reference_level},
                {"gt_identity", opt.gt_identity},
                {"gt_file", opt.gt_file},
                {"tolerance", opt.tolerance},
                {"name", pair.name},
                {"out", opt.out}};
  write_run_record(run_record_for_file(out), "dataset pair", global, resolved);

  std::cout << "pair '" << pair.name << "' validated: " << pair.query.place_count()
            << " places, conditions {";
  bool first = true;
  for (const auto& tag : pair.conditions) {
    std::cout << (first ? "" : ",") << tag;
    first = false;
  }
  std::cout << "}\n";
  return 0;
}

struct MixOpts {
  std::string traverse_manifest;
  std::string proportions = "1:0.5,240:0.5";
  std::string out;
};

int cmd_dataset_mix(const MixOpts& opt, const GlobalOpts& global) {
  if (opt.traverse_manifest.empty() || opt.out.empty()) {
    throw UsageError("dataset mix needs --traverse and --out");
  }
  const Traverse traverse = load_traverse_manifest(opt.traverse_manifest);
  const MixSequence mix =
      build_shuffled_mix(traverse, parse_proportions(opt.proportions), global.seed);
  save_mix(mix, opt.out);

  json resolved{{"traverse", opt.traverse_manifest},
                {"proportions", opt.proportions},
                {"out", opt.out}};
  write_run_record(run_record_for_file(opt.out), "dataset mix", global, resolved);

  std::map<int, int> counts;
  for (const auto& entry : mix.entries) {
    ++counts[entry.level];
  }
  std::cout << "mix of " << mix.entries.size() << " places:";
  for (const auto& [level, count] : counts) {
    std::cout << " L" << level << "=" << count;
  }
  std::cout << " (seed " << global.seed << ")\n";
  return 0;
}

// --- describe ---

struct DescribeOpts {
  std::string traverse_manifest;
  int level = 1;
  std::string method = "sad";
  std::string out;
  SadConfig sad;
};

int cmd_describe(const DescribeOpts& opt, const GlobalOpts& global) {
  if (opt.traverse_manifest.empty() || opt.out.empty()) {
    throw UsageError("describe needs --traverse and --out");
  }
  if (opt.method != "sad") {
    throw UsageError("native extraction supports --method sad only; other methods arrive as "
                     "descriptor files");
  }
  const Traverse traverse = load_traverse_manifest(opt.traverse_manifest, true);
  if (!traverse.has_level(opt.level)) {
    raise(Errc::LevelUnavailable,
          "traverse has no level " + std::to_string(opt.level));
  }
  const DescriptorSet set = describe_traverse_level(traverse, opt.level, opt.sad, global.jobs);
  save_descriptor_set(set, opt.out);

  json resolved{{"traverse", opt.traverse_manifest}, {"level", opt.level},
                {"method", opt.method},              {"out", opt.out},
                {"down_w", opt.sad.down_w},          {"down_h", opt.sad.down_h},
                {"patch", opt.sad.patch}};
  write_run_record(run_record_for_file(opt.out), "describe", global, resolved);

  std::cout << "wrote " << set.size() << " descriptors (dim " << set.dim << ") to " << opt.out
            << "\n";
  return 0;
}

// --- evaluate ---

struct EvaluateOpts {
  std::string pair_manifest;
  bool sad = false;
  std::string sources;
  std::string metric = "neg_mad";
  std::string levels = "1,10,20,30,40,60,80,120,240";
  std::string out;
  std::string dump_pr;
  SadConfig sad_cfg;
};

int cmd_evaluate(const EvaluateOpts& opt, const GlobalOpts& global) {
  if (opt.pair_manifest.empty() || opt.out.empty()) {
    throw UsageError("evaluate needs --pair and --out");
  }
  if (!opt.sad && opt.sources.empty()) {
    throw UsageError("evaluate needs --sad and/or --sources");
  }
  const std::vector<int> levels = parse_level_list(opt.levels);
  const Metric metric = metric_from_string(opt.metric);

  const fs::path pair_path(opt.pair_manifest);
  const PairManifest manifest = load_pair_manifest(pair_path);
  const fs::path pair_base = pair_path.has_parent_path() ? pair_path.parent_path() : fs::path(".");
  const DatasetPair pair = resolve_pair(manifest, pair_base, opt.sad);

  std::deque<DescriptorSet> storage;  // keeps sets alive for the grid
  std::vector<GridRowSpec> specs;

  if (opt.sad) {
    GridRowSpec spec;
    spec.pair = pair.name;
    spec.method = "sad";
    spec.deblur = "none";
    spec.metric = metric;
    spec.gt = &pair.ground_truth;
    storage.push_back(describe_traverse_level(pair.reference, pair.reference_level, opt.sad_cfg,
                                              global.jobs));
    spec.reference = &storage.back();
    for (int level : levels) {
      if (!pair.query.has_level(level)) {
        std::cerr << "warning: query traverse has no level " << level << ", cell left empty\n";
        continue;
      }
      storage.push_back(describe_traverse_level(pair.query, level, opt.sad_cfg, global.jobs));
      spec.query_by_level[level] = &storage.back();
    }
    specs.push_back(std::move(spec));
  }

  if (!opt.sources.empty()) {
    const fs::path sources_path(opt.sources);
    if (!fs::exists(sources_path)) {
      raise(Errc::MissingImage, "sources file not found: " + opt.sources);
    }
    std::ifstream in(sources_path);
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) {
      raise(Errc::BadManifest, opt.sources + " must hold a JSON array of descriptor sources");
    }
    const fs::path sources_base =
        sources_path.has_parent_path() ? sources_path.parent_path() : fs::path(".");
    const auto resolve = [&](const std::string& rel) {
      const fs::path p(rel);
      return p.is_absolute() ? p : sources_base / p;
    };
    for (const auto& entry : doc) {
      GridRowSpec spec;
      spec.pair = pair.name;
      spec.method = entry.value("method", "external");
      spec.deblur = entry.value("deblur", "none");
      spec.metric = entry.contains("metric")
                        ? metric_from_string(entry.at("metric").get<std::string>())
                        : metric;
      spec.gt = &pair.ground_truth;
      if (!entry.contains("reference") || !entry.contains("levels")) {
        raise(Errc::BadManifest, opt.sources + ": each source needs reference and levels");
      }
      const fs::path ref_path = resolve(entry.at("reference").get<std::string>());
      if (!fs::exists(ref_path)) {
        raise(Errc::MissingImage, "cell (" + spec.pair + ", " + spec.method + ", " + spec.deblur +
                                      ", reference): descriptor file missing: " +
                                      ref_path.string());
      }
      storage.push_back(load_descriptor_set(ref_path));
      storage.back().method = spec.method;
      spec.reference = &storage.back();
      for (const auto& [key, value] : entry.at("levels").items()) {
        const int level = std::stoi(key);
        const fs::path q_path = resolve(value.get<std::string>());
        if (!fs::exists(q_path)) {
          raise(Errc::MissingImage, "cell (" + spec.pair + ", " + spec.method + ", " +
                                        spec.deblur + ", L" + level_dir_name(level) +
                                        "): descriptor file missing: " + q_path.string());
        }
        storage.push_back(load_descriptor_set(q_path));
        storage.back().method = spec.method;
        spec.query_by_level[level] = &storage.back();
      }
      specs.push_back(std::move(spec));
    }
  }

  const GridTable table = evaluate_grid(specs, levels, !opt.dump_pr.empty());
  for (const auto& row : table.rows) {
    for (const auto& [level, cell] : row.cells) {
      if (!cell.auc && !cell.note.empty() && cell.note != "missing") {
        std::cerr << "warning: cell (" << row.pair << ", " << row.method << ", " << row.deblur
                  << ", L" << level_dir_name(level) << ") failed: " << cell.note << "\n";
      }
    }
  }

  const fs::path out(opt.out);
  if (out.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(out.parent_path(), ec);
  }
  std::ofstream csv(out, std::ios::binary);
  if (!csv) {
    raise(Errc::Io, "cannot write " + opt.out);
  }
  csv << table.to_csv();

  if (!opt.dump_pr.empty()) {
    fs::create_directories(opt.dump_pr);
    for (const auto& row : table.rows) {
      for (const auto& [level, cell] : row.cells) {
        if (!cell.curve) {
          continue;
        }
        json curve;
        curve["thresholds"] = cell.curve->thresholds;
        json points = json::array();
        for (const auto& p : cell.curve->points) {
          points.push_back({{"recall", p.recall}, {"precision", p.precision}});
        }
        curve["points"] = std::move(points);
        const std::string file_name =
            row.pair + "_" + row.method + "_" + row.deblur + "_L" + level_dir_name(level) + ".json";
        std::ofstream(fs::path(opt.dump_pr) / file_name) << curve.dump(2) << '\n';
      }
    }
  }

  json resolved{{"pair", opt.pair_manifest}, {"sad", opt.sad},       {"sources", opt.sources},
                {"metric", opt.metric},      {"levels", opt.levels}, {"out", opt.out},
                {"dump_pr", opt.dump_pr},    {"down_w", opt.sad_cfg.down_w},
                {"down_h", opt.sad_cfg.down_h}, {"patch", opt.sad_cfg.patch}};
  write_run_record(run_record_for_file(out), "evaluate", global, resolved);

  std::cout << "wrote " << table.rows.size() << " result rows to " << opt.out << "\n";
  return 0;
}

// --- detect / calibrate ---

std::vector<fs::path> rasters_in(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    raise(Errc::NoFrames, "not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_supported_raster(entry.path())) {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    raise(Errc::NoFrames, "no raster images in " + dir.string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

struct DetectOpts {
  std::string images_dir;
  std::string traverse_manifest;
  int level = 1;
  std::string threshold_file;
  std::string out;
};

int cmd_detect(const DetectOpts& opt, const GlobalOpts& global) {
  if (opt.out.empty() || (opt.images_dir.empty() && opt.traverse_manifest.empty())) {
    throw UsageError("detect needs --out and one of --images or --traverse");
  }

  std::vector<std::pair<std::string, fs::path>> inputs;  // (label, file)
  if (!opt.images_dir.empty()) {
    for (const auto& file : rasters_in(opt.images_dir)) {
      inputs.emplace_back(file.filename().string(), file);
    }
  } else {
    const Traverse traverse = load_traverse_manifest(opt.traverse_manifest, true);
    if (!traverse.has_level(opt.level)) {
      raise(Errc::LevelUnavailable, "traverse has no level " + std::to_string(opt.level));
    }
    for (int p = 0; p < traverse.place_count(); ++p) {
      inputs.emplace_back(traverse.path_at(opt.level, p), traverse.resolve_path(opt.level, p));
    }
  }

  std::optional<Threshold> threshold;
  if (!opt.threshold_file.empty()) {
    threshold = load_threshold(opt.threshold_file);
  }

  std::vector<double> variances(inputs.size());
  parallel_for(inputs.size(), global.jobs, [&](std::size_t i) {
    variances[i] = laplacian_variance(load_image(inputs[i].second)).variance;
  });

  const fs::path out(opt.out);
  if (out.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(out.parent_path(), ec);
  }
  std::ofstream csv(out, std::ios::binary);
  if (!csv) {
    raise(Errc::Io, "cannot write " + opt.out);
  }
  csv << "image,variance,decision\n";
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    char value[32];
    std::snprintf(value, sizeof(value), "%.4f", variances[i]);
    csv << inputs[i].first << ',' << value << ',';
    if (threshold) {
      csv << (classify({variances[i], ""}, *threshold) == Sharpness::Sharp ? "sharp" : "blurred");
    }
    csv << '\n';
  }

  json resolved{{"images", opt.images_dir},
                {"traverse", opt.traverse_manifest},
                {"level", opt.level},
                {"threshold_file", opt.threshold_file},
                {"out", opt.out}};
  write_run_record(run_record_for_file(out), "detect", global, resolved);

  std::cout << "scored " << inputs.size() << " images to " << opt.out << "\n";
  return 0;
}

struct CalibrateOpts {
  std::string sharp_dir;
  std::string blurred_dir;
  std::string out;
};

int cmd_calibrate(const CalibrateOpts& opt, const GlobalOpts& global) {
  if (opt.sharp_dir.empty() || opt.blurred_dir.empty() || opt.out.empty()) {
    throw UsageError("calibrate needs --sharp, --blurred and --out");
  }
  const auto score_dir = [&](const fs::path& dir) {
    const auto files = rasters_in(dir);
    std::vector<double> scores(files.size());
    parallel_for(files.size(), global.jobs, [&](std::size_t i) {
      scores[i] = laplacian_variance(load_image(files[i])).variance;
    });
    return scores;
  };
  const Threshold threshold = calibrate_threshold(score_dir(opt.sharp_dir),
                                                  score_dir(opt.blurred_dir));
  save_threshold(threshold, opt.out);

  json resolved{{"sharp", opt.sharp_dir}, {"blurred", opt.blurred_dir}, {"out", opt.out}};
  write_run_record(run_record_for_file(opt.out), "calibrate", global, resolved);

  std::cout << "cutoff " << threshold.cutoff << " ("
            << threshold.calibration.misclassified << " training errors over "
            << threshold.calibration.sharp_samples + threshold.calibration.blurred_samples
            << " samples)" << (threshold.calibration.warning ? " [warning: not separable]" : "")
            << "\n";
  return 0;
}

// --- adaptive ---

struct AdaptiveOpts {
  std::string traverse_manifest;
  std::string mix_file;
  std::string reference_file;
  std::string mode = "no-deblur";
  std::string threshold_file;
  std::string bridge_cmd;
  double timeout_s = 300.0;
  int batch_size = 16;
  std::string metric = "neg_mad";
  int tolerance = 1;
  std::string gt_file;
  std::string power_log;
  std::string out;
  SadConfig sad;
};

int cmd_adaptive(const AdaptiveOpts& opt, const GlobalOpts& global) {
  if (opt.traverse_manifest.empty() || opt.mix_file.empty() || opt.reference_file.empty() ||
      opt.out.empty()) {
    throw UsageError("adaptive needs --traverse, --mix, --reference and --out");
  }
  PipelineConfig cfg;
  cfg.mode = mode_from_string(opt.mode);
  cfg.metric = metric_from_string(opt.metric);
  cfg.sad = opt.sad;
  if (cfg.mode == PipelineMode::DetectDeblur && opt.threshold_file.empty()) {
    throw UsageError("detect-deblur needs --threshold-file");
  }
  if (cfg.mode != PipelineMode::NoDeblur && opt.bridge_cmd.empty()) {
    throw UsageError("deblurring modes need --bridge-cmd");
  }
  if (!opt.threshold_file.empty()) {
    cfg.threshold = load_threshold(opt.threshold_file);
  }
  if (!opt.bridge_cmd.empty()) {
    cfg.bridge = DeblurBridge{opt.bridge_cmd, opt.timeout_s, opt.batch_size};
  }
  if (!opt.power_log.empty()) {
    cfg.power_log = load_power_log(opt.power_log);
  }

  const Traverse traverse = load_traverse_manifest(opt.traverse_manifest, true);
  const MixSequence mix = load_mix(opt.mix_file);
  DescriptorSet reference = load_descriptor_set(opt.reference_file);
  reference.method = "reference";

  const int n_query = static_cast<int>(mix.entries.size());
  GroundTruth gt = opt.gt_file.empty()
                       ? identity_ground_truth(n_query, opt.tolerance)
                       : load_correspondence(opt.gt_file, n_query, opt.tolerance);
  if (opt.gt_file.empty() && reference.size() != static_cast<std::size_t>(n_query)) {
    raise(Errc::BadGroundTruth,
          "identity ground truth needs reference size equal to the mix length");
  }

  json resolved{{"traverse", opt.traverse_manifest},
                {"mix", opt.mix_file},
                {"reference", opt.reference_file},
                {"mode", opt.mode},
                {"threshold_file", opt.threshold_file},
                {"bridge_cmd", opt.bridge_cmd},
                {"timeout_s", opt.timeout_s},
                {"batch_size", opt.batch_size},
                {"metric", opt.metric},
                {"tolerance", opt.tolerance},
                {"gt_file", opt.gt_file},
                {"power_log", opt.power_log},
                {"out", opt.out}};

  const fs::path out(opt.out);
  try {
    const auto [result, stats] = run_pipeline(traverse, mix, reference, gt, cfg);
    if (out.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(out.parent_path(), ec);
    }
    std::ofstream(out) << stats.to_json().dump(2) << '\n';
    write_run_record(run_record_for_file(out), "adaptive", global, resolved);
    std::cout << to_string(stats.mode) << ": auc " << result.auc << ", "
              << stats.deblur_invocations << "/" << stats.query_count << " deblurred, "
              << stats.time_per_query_ms << " ms/query\n";
    return 0;
  } catch (const PipelineError& e) {
    json doc = e.partial_stats().to_json();
    doc["error"] = to_string(e.code());
    doc["failing_query"] = e.failing_query();
    if (out.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(out.parent_path(), ec);
    }
    std::ofstream(out) << doc.dump(2) << '\n';
    write_run_record(run_record_for_file(out), "adaptive", global, resolved);
    throw;
  }
}

// --- report ---

struct ReportOpts {
  std::string results_csv;
  std::vector<std::string> stats_files;
  std::string out;
};

int cmd_report(const ReportOpts& opt, const GlobalOpts& global) {
  if (opt.out.empty() || (opt.results_csv.empty() && opt.stats_files.empty())) {
    throw UsageError("report needs --out and at least one of --results or --stats");
  }
  json report;

  if (!opt.results_csv.empty()) {
    std::ifstream in(opt.results_csv);
    if (!in) {
      raise(Errc::Io, "cannot open " + opt.results_csv);
    }
    std::string line;
    if (!std::getline(in, line)) {
      raise(Errc::BadFormat, opt.results_csv + " is empty");
    }
    std::vector<std::string> header;
    {
      std::stringstream fields(line);
      std::string field;
      while (std::getline(fields, field, ',')) {
        header.push_back(field);
      }
    }
    if (header.size() < 5 || header[0] != "pair" || header[1] != "method" ||
        header[2] != "deblur") {
      raise(Errc::BadFormat, opt.results_csv + " does not look like a results grid");
    }
    const std::size_t level_cols = header.size() - 5;  // minus pair,method,deblur,avg,std

    json rows = json::array();
    std::map<std::string, std::pair<double, int>> level_sums;
    while (std::getline(in, line)) {
      if (line.empty()) {
        continue;
      }
      std::stringstream fields(line);
      std::string field;
      std::vector<std::string> values;
      while (std::getline(fields, field, ',')) {
        values.push_back(field);
      }
      values.resize(header.size());
      json row{{"pair", values[0]}, {"method", values[1]}, {"deblur", values[2]}};
      json auc_by_level = json::object();
      for (std::size_t c = 0; c < level_cols; ++c) {
        const std::string& cell = values[3 + c];
        if (!cell.empty()) {
          const double v = std::stod(cell);
          auc_by_level[header[3 + c]] = v;
          auto& [sum, count] = level_sums[header[3 + c]];
          sum += v;
          ++count;
        }
      }
      row["auc"] = std::move(auc_by_level);
      if (!values[header.size() - 2].empty()) {
        row["avg"] = std::stod(values[header.size() - 2]);
      }
      if (!values[header.size() - 1].empty()) {
        row["std"] = std::stod(values[header.size() - 1]);
      }
      rows.push_back(std::move(row));
    }
    report["rows"] = std::move(rows);
    json means = json::object();
    for (const auto& [level, sum_count] : level_sums) {
      means[level] = sum_count.first / sum_count.second;
    }
    report["per_level_mean"] = std::move(means);
  }

  if (!opt.stats_files.empty()) {
    json stats = json::array();
    for (const auto& file : opt.stats_files) {
      std::ifstream in(file);
      if (!in) {
        raise(Errc::Io, "cannot open " + file);
      }
      json doc = json::parse(in, nullptr, false);
      if (doc.is_discarded()) {
        raise(Errc::BadFormat, file + " is not valid JSON");
      }
      doc["file"] = file;
      stats.push_back(std::move(doc));
    }
    report["pipeline_stats"] = std::move(stats);
  }

  const fs::path out(opt.out);
  if (out.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(out.parent_path(), ec);
  }
  std::ofstream(out) << report.dump(2) << '\n';

  json resolved{{"results", opt.results_csv}, {"stats", opt.stats_files}, {"out", opt.out}};
  write_run_record(run_record_for_file(out), "report", global, resolved);

  std::cout << "wrote report to " << opt.out << "\n";
  return 0;
}

void emit_error(const GlobalOpts& global, const std::string& code, const std::string& message) {
  if (global.json_errors) {
    json err{{"error", code}, {"message", message}};
    std::cerr << err.dump() << "\n";
  } else {
    std::cerr << "error: " << message << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  GlobalOpts global;
  CLI::App app{"motion-blur VPR benchmark toolkit"};
  app.require_subcommand(1);
  app.add_option("--seed", global.seed, "seed for all randomized steps");
  app.add_option("--jobs", global.jobs, "worker thread bound");
  app.add_flag("--json", global.json_errors, "machine-readable errors on stderr");
  app.add_option("--config", global.config_file, "JSON config file mirroring flag names");

  // synth
  SynthOpts synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "synthesize a blurred traverse from frames");
  auto* synth_frames = synth_cmd->add_option("--frames", synth.frames_dir, "frame directory");
  auto* synth_fps = synth_cmd->add_option("--fps", synth.fps, "source frame rate");
  auto* synth_out = synth_cmd->add_option("--out", synth.out_dir, "output root");
  auto* synth_name = synth_cmd->add_option("--name", synth.name, "traverse name");
  auto* synth_route = synth_cmd->add_option("--route", synth.route, "route label");
  auto* synth_cond = synth_cmd->add_option("--conditions", synth.conditions, "condition tags");
  auto* synth_levels = synth_cmd->add_option("--levels", synth.levels, "blur levels");
  auto* synth_stride = synth_cmd->add_option("--stride", synth.stride, "anchor stride");
  auto* synth_maxl = synth_cmd->add_option("--max-level", synth.max_level, "forced max level");

  // dataset
  CLI::App* dataset_cmd = app.add_subcommand("dataset", "build pair manifests and mixes");
  dataset_cmd->require_subcommand(1);
  PairOpts pair;
  CLI::App* pair_cmd = dataset_cmd->add_subcommand("pair", "build a query/reference pair");
  auto* pair_query = pair_cmd->add_option("--query", pair.query_manifest, "query manifest");
  auto* pair_qlevel = pair_cmd->add_option("--query-level", pair.query_level, "query blur level");
  auto* pair_ref = pair_cmd->add_option("--reference", pair.reference_manifest, "ref manifest");
  auto* pair_rlevel =
      pair_cmd->add_option("--reference-level", pair.reference_level, "reference level");
  auto* pair_ident = pair_cmd->add_flag("--gt-identity", pair.gt_identity, "identity ground truth");
  auto* pair_gtfile = pair_cmd->add_option("--gt-file", pair.gt_file, "correspondence file");
  auto* pair_tol = pair_cmd->add_option("--tolerance", pair.tolerance, "match tolerance W");
  auto* pair_name = pair_cmd->add_option("--name", pair.name, "pair name");
  auto* pair_out = pair_cmd->add_option("--out", pair.out, "pair manifest path");

  MixOpts mix;
  CLI::App* mix_cmd = dataset_cmd->add_subcommand("mix", "build a shuffled mixed-blur sequence");
  auto* mix_traverse = mix_cmd->add_option("--traverse", mix.traverse_manifest, "traverse");
  auto* mix_props = mix_cmd->add_option("--proportions", mix.proportions, "level:fraction list");
  auto* mix_out = mix_cmd->add_option("--out", mix.out, "mix file path");

  // describe
  DescribeOpts describe;
  CLI::App* describe_cmd = app.add_subcommand("describe", "extract native descriptors");
  auto* desc_traverse =
      describe_cmd->add_option("--traverse", describe.traverse_manifest, "traverse manifest");
  auto* desc_level = describe_cmd->add_option("--level", describe.level, "blur level");
  auto* desc_method = describe_cmd->add_option("--method", describe.method, "descriptor method")
                          ->check(CLI::IsMember({"sad"}));
  auto* desc_out = describe_cmd->add_option("--out", describe.out, "descriptor file");
  auto* desc_dw = describe_cmd->add_option("--down-w", describe.sad.down_w, "downsample width");
  auto* desc_dh = describe_cmd->add_option("--down-h", describe.sad.down_h, "downsample height");
  auto* desc_patch = describe_cmd->add_option("--patch", describe.sad.patch, "patch size");

  // evaluate
  EvaluateOpts evaluate;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "AUC grid over blur levels");
  auto* eval_pair = evaluate_cmd->add_option("--pair", evaluate.pair_manifest, "pair manifest");
  auto* eval_sad = evaluate_cmd->add_flag("--sad", evaluate.sad, "native SAD row");
  auto* eval_sources =
      evaluate_cmd->add_option("--sources", evaluate.sources, "descriptor sources JSON");
  auto* eval_metric = evaluate_cmd->add_option("--metric", evaluate.metric, "similarity metric")
                          ->check(CLI::IsMember({"neg_mad", "cosine"}));
  auto* eval_levels = evaluate_cmd->add_option("--levels", evaluate.levels, "level columns");
  auto* eval_out = evaluate_cmd->add_option("--out", evaluate.out, "results CSV path");
  auto* eval_dump = evaluate_cmd->add_option("--dump-pr", evaluate.dump_pr, "PR dump directory");
  auto* eval_dw = evaluate_cmd->add_option("--down-w", evaluate.sad_cfg.down_w, "SAD width");
  auto* eval_dh = evaluate_cmd->add_option("--down-h", evaluate.sad_cfg.down_h, "SAD height");
  auto* eval_patch = evaluate_cmd->add_option("--patch", evaluate.sad_cfg.patch, "SAD patch");

  // detect
  DetectOpts detect;
  CLI::App* detect_cmd = app.add_subcommand("detect", "Laplacian-variance blur scores");
  auto* det_images = detect_cmd->add_option("--images", detect.images_dir, "image directory");
  auto* det_traverse =
      detect_cmd->add_option("--traverse", detect.traverse_manifest, "traverse manifest");
  auto* det_level = detect_cmd->add_option("--level", detect.level, "blur level");
  auto* det_threshold =
      detect_cmd->add_option("--threshold-file", detect.threshold_file, "threshold JSON");
  auto* det_out = detect_cmd->add_option("--out", detect.out, "scores CSV path");

  // calibrate
  CalibrateOpts calibrate;
  CLI::App* calibrate_cmd = app.add_subcommand("calibrate", "fit a detection threshold");
  auto* cal_sharp = calibrate_cmd->add_option("--sharp", calibrate.sharp_dir, "sharp images");
  auto* cal_blurred =
      calibrate_cmd->add_option("--blurred", calibrate.blurred_dir, "blurred images");
  auto* cal_out = calibrate_cmd->add_option("--out", calibrate.out, "threshold JSON path");

  // adaptive
  AdaptiveOpts adaptive;
  CLI::App* adaptive_cmd = app.add_subcommand("adaptive", "run a deblurring strategy");
  auto* ad_traverse =
      adaptive_cmd->add_option("--traverse", adaptive.traverse_manifest, "traverse manifest");
  auto* ad_mix = adaptive_cmd->add_option("--mix", adaptive.mix_file, "mix sequence file");
  auto* ad_reference =
      adaptive_cmd->add_option("--reference", adaptive.reference_file, "reference descriptors");
  auto* ad_mode = adaptive_cmd->add_option("--mode", adaptive.mode, "strategy")
                      ->check(CLI::IsMember({"no-deblur", "all-deblur", "detect-deblur"}));
  auto* ad_threshold =
      adaptive_cmd->add_option("--threshold-file", adaptive.threshold_file, "threshold JSON");
  auto* ad_bridge = adaptive_cmd->add_option("--bridge-cmd", adaptive.bridge_cmd,
                                             "deblurrer command with {in_dir} {out_dir}");
  auto* ad_timeout = adaptive_cmd->add_option("--timeout", adaptive.timeout_s, "bridge timeout s");
  auto* ad_batch = adaptive_cmd->add_option("--batch-size", adaptive.batch_size, "bridge batch");
  auto* ad_metric = adaptive_cmd->add_option("--metric", adaptive.metric, "similarity metric")
                        ->check(CLI::IsMember({"neg_mad", "cosine"}));
  auto* ad_tol = adaptive_cmd->add_option("--tolerance", adaptive.tolerance, "gt tolerance W");
  auto* ad_gtfile = adaptive_cmd->add_option("--gt-file", adaptive.gt_file, "correspondence file");
  auto* ad_power = adaptive_cmd->add_option("--power-log", adaptive.power_log, "power CSV");
  auto* ad_out = adaptive_cmd->add_option("--out", adaptive.out, "stats JSON path");
  auto* ad_dw = adaptive_cmd->add_option("--down-w", adaptive.sad.down_w, "SAD width");
  auto* ad_dh = adaptive_cmd->add_option("--down-h", adaptive.sad.down_h, "SAD height");
  auto* ad_patch = adaptive_cmd->add_option("--patch", adaptive.sad.patch, "SAD patch");

  // report
  ReportOpts report;
  CLI::App* report_cmd = app.add_subcommand("report", "bundle results into plot-ready JSON");
  auto* rep_results = report_cmd->add_option("--results", report.results_csv, "results CSV");
  auto* rep_stats = report_cmd->add_option("--stats", report.stats_files, "stats JSON files");
  auto* rep_out = report_cmd->add_option("--out", report.out, "report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    ConfigLayer config;
    config.load(global.config_file);

    if (synth_cmd->parsed()) {
      config.select("synth");
      config.fill(synth_frames, synth.frames_dir, "frames");
      config.fill(synth_fps, synth.fps, "fps");
      config.fill(synth_out, synth.out_dir, "out");
      config.fill(synth_name, synth.name, "name");
      config.fill(synth_route, synth.route, "route");
      config.fill(synth_cond, synth.conditions, "conditions");
      config.fill(synth_levels, synth.levels, "levels");
      config.fill(synth_stride, synth.stride, "stride");
      config.fill(synth_maxl, synth.max_level, "max_level");
      return cmd_synth(synth, global);
    }
    if (pair_cmd->parsed()) {
      config.select("dataset_pair");
      config.fill(pair_query, pair.query_manifest, "query");
      config.fill(pair_qlevel, pair.query_level, "query_level");
      config.fill(pair_ref, pair.reference_manifest, "reference");
      config.fill(pair_rlevel, pair.reference_level, "reference_level");
      config.fill(pair_ident, pair.gt_identity, "gt_identity");
      config.fill(pair_gtfile, pair.gt_file, "gt_file");
      config.fill(pair_tol, pair.tolerance, "tolerance");
      config.fill(pair_name, pair.name, "name");
      config.fill(pair_out, pair.out, "out");
      return cmd_dataset_pair(pair, global);
    }
    if (mix_cmd->parsed()) {
      config.select("dataset_mix");
      config.fill(mix_traverse, mix.traverse_manifest, "traverse");
      config.fill(mix_props, mix.proportions, "proportions");
      config.fill(mix_out, mix.out, "out");
      return cmd_dataset_mix(mix, global);
    }
    if (describe_cmd->parsed()) {
      config.select("describe");
      config.fill(desc_traverse, describe.traverse_manifest, "traverse");
      config.fill(desc_level, describe.level, "level");
      config.fill(desc_method, describe.method, "method");
      config.fill(desc_out, describe.out, "out");
      config.fill(desc_dw, describe.sad.down_w, "down_w");
      config.fill(desc_dh, describe.sad.down_h, "down_h");
      config.fill(desc_patch, describe.sad.patch, "patch");
      return cmd_describe(describe, global);
    }
    if (evaluate_cmd->parsed()) {
      config.select("evaluate");
      config.fill(eval_pair, evaluate.pair_manifest, "pair");
      config.fill(eval_sad, evaluate.sad, "sad");
      config.fill(eval_sources, evaluate.sources, "sources");
      config.fill(eval_metric, evaluate.metric, "metric");
      config.fill(eval_levels, evaluate.levels, "levels");
      config.fill(eval_out, evaluate.out, "out");
      config.fill(eval_dump, evaluate.dump_pr, "dump_pr");
      config.fill(eval_dw, evaluate.sad_cfg.down_w, "down_w");
      config.fill(eval_dh, evaluate.sad_cfg.down_h, "down_h");
      config.fill(eval_patch, evaluate.sad_cfg.patch, "patch");
      return cmd_evaluate(evaluate, global);
    }
    if (detect_cmd->parsed()) {
      config.select("detect");
      config.fill(det_images, detect.images_dir, "images");
      config.fill(det_traverse, detect.traverse_manifest, "traverse");
      config.fill(det_level, detect.level, "level");
      config.fill(det_threshold, detect.threshold_file, "threshold_file");
      config.fill(det_out, detect.out, "out");
      return cmd_detect(detect, global);
    }
    if (calibrate_cmd->parsed()) {
      config.select("calibrate");
      config.fill(cal_sharp, calibrate.sharp_dir, "sharp");
      config.fill(cal_blurred, calibrate.blurred_dir, "blurred");
      config.fill(cal_out, calibrate.out, "out");
      return cmd_calibrate(calibrate, global);
    }
    if (adaptive_cmd->parsed()) {
      config.select("adaptive");
      config.fill(ad_traverse, adaptive.traverse_manifest, "traverse");
      config.fill(ad_mix, adaptive.mix_file, "mix");
      config.fill(ad_reference, adaptive.reference_file, "reference");
      config.fill(ad_mode, adaptive.mode, "mode");
      config.fill(ad_threshold, adaptive.threshold_file, "threshold_file");
      config.fill(ad_bridge, adaptive.bridge_cmd, "bridge_cmd");
      config.fill(ad_timeout, adaptive.timeout_s, "timeout");
      config.fill(ad_batch, adaptive.batch_size, "batch_size");
      config.fill(ad_metric, adaptive.metric, "metric");
      config.fill(ad_tol, adaptive.tolerance, "tolerance");
      config.fill(ad_gtfile, adaptive.gt_file, "gt_file");
      config.fill(ad_power, adaptive.power_log, "power_log");
      config.fill(ad_out, adaptive.out, "out");
      config.fill(ad_dw, adaptive.sad.down_w, "down_w");
      config.fill(ad_dh, adaptive.sad.down_h, "down_h");
      config.fill(ad_patch, adaptive.sad.patch, "patch");
      return cmd_adaptive(adaptive, global);
    }
    if (report_cmd->parsed()) {
      config.select("report");
      config.fill(rep_results, report.results_csv, "results");
      config.fill(rep_stats, report.stats_files, "stats");
      config.fill(rep_out, report.out, "out");
      return cmd_report(report, global);
    }
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    emit_error(global, "Usage", e.what());
    return 2;
  } catch (const Error& e) {
    emit_error(global, to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error(global, "Internal", e.what());
    return 1;
  }
}
