#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "blurbench/error.hpp"

namespace blurbench {

/// One image reference inside a traverse.
struct PlaceRef {
  int index = 0;
  int level = 1;
  std::string path;

  bool operator==(const PlaceRef&) const = default;
};

/// A recorded pass along a route: per blur level, one image per place,
/// index-aligned across levels. Immutable after construction.
class Traverse {
 public:
  Traverse(std::string name, std::string route, std::set<std::string> conditions, double fps,
           std::vector<PlaceRef> places);

  const std::string& name() const noexcept { return name_; }
  const std::string& route() const noexcept { return route_; }
  const std::set<std::string>& conditions() const noexcept { return conditions_; }
  double fps() const noexcept { return fps_; }

  /// Places sorted by (level, index).
  const std::vector<PlaceRef>& places() const noexcept { return places_; }
  std::vector<int> levels() const;
  bool has_level(int level) const noexcept { return by_level_.count(level) != 0; }
  int place_count() const noexcept { return place_count_; }
  const std::string& path_at(int level, int place) const;

  /// Directory image paths resolve against (set by the manifest loader;
  /// empty for in-memory traverses with absolute or cwd-relative paths).
  const std::filesystem::path& base_dir() const noexcept { return base_dir_; }
  void set_base_dir(std::filesystem::path dir) { base_dir_ = std::move(dir); }
  std::filesystem::path resolve_path(int level, int place) const;

  bool operator==(const Traverse& other) const;

 private:
  std::string name_;
  std::string route_;
  std::set<std::string> conditions_;
  double fps_ = 0.0;
  std::vector<PlaceRef> places_;
  std::map<int, std::vector<std::string>> by_level_;
  int place_count_ = 0;
  std::filesystem::path base_dir_;
};

/// Per-query sets of correct reference place indices.
class GroundTruth {
 public:
  GroundTruth(std::vector<std::vector<int>> matches, int tolerance);

  std::size_t query_count() const noexcept { return matches_.size(); }
  const std::vector<int>& matches_for(std::size_t query) const { return matches_.at(query); }
  bool contains(std::size_t query, int reference) const;
  std::size_t positive_count() const noexcept { return positives_; }
  int tolerance() const noexcept { return tolerance_; }
  int max_reference() const noexcept { return max_reference_; }

  bool operator==(const GroundTruth&) const = default;

 private:
  std::vector<std::vector<int>> matches_;
  int tolerance_ = 0;
  std::size_t positives_ = 0;
  int max_reference_ = -1;
};

/// Query i matches references i-W .. i+W, clipped to [0, n).
GroundTruth identity_ground_truth(int n_query, int tolerance);

/// Correspondence file: lines "query<TAB>ref_low<TAB>ref_high" (inclusive).
GroundTruth load_correspondence(const std::filesystem::path& path, int n_query, int tolerance);

/// A query traverse at one blur level against a (sharp) reference traverse.
struct DatasetPair {
  std::string name;
  Traverse query;
  int query_level = 1;
  Traverse reference;
  int reference_level = 1;
  GroundTruth ground_truth;
  std::set<std::string> conditions;
};

DatasetPair build_pair(const Traverse& query, int query_level, const Traverse& reference,
                       GroundTruth gt, int reference_level = 1);

/// Shuffled mixed-blur sequence: one entry per place, level assigned by a
/// seeded shuffle so blur intensities interleave along the traverse.
struct MixEntry {
  int place = 0;
  int level = 1;

  bool operator==(const MixEntry&) const = default;
};

struct MixSequence {
  std::vector<MixEntry> entries;  // ordered by place index
  std::uint64_t seed = 0;
  std::map<int, double> proportions;

  bool operator==(const MixSequence&) const = default;
};

/// Largest-remainder allocation of round(fraction*P) entries per level
/// (ties to the lower level), then a Fisher-Yates shuffle of the place
/// indices decides which places receive which level.
MixSequence build_shuffled_mix(const Traverse& traverse, const std::map<int, double>& proportions,
                               std::uint64_t seed);

// --- manifests ---

void save_traverse_manifest(const Traverse& traverse, const std::filesystem::path& path);

/// Loads and validates a traverse manifest. With check_files, every referenced
/// image must exist (resolved against the manifest directory).
Traverse load_traverse_manifest(const std::filesystem::path& path, bool check_files = false);

/// Ground-truth declaration inside a pair manifest: exactly one of
/// identity / file / inline matches.
struct GroundTruthSpec {
  int tolerance = 1;
  bool identity = false;
  std::string file;                            // correspondence file, relative to the manifest
  std::optional<std::vector<std::vector<int>>> matches;

  bool operator==(const GroundTruthSpec&) const = default;
};

/// Serializable pair description; resolve_pair turns it into a DatasetPair.
struct PairManifest {
  std::string name;
  std::string query_manifest;
  int query_level = 1;
  std::string reference_manifest;
  int reference_level = 1;
  GroundTruthSpec ground_truth;

  bool operator==(const PairManifest&) const = default;
};

void save_pair_manifest(const PairManifest& manifest, const std::filesystem::path& path);
PairManifest load_pair_manifest(const std::filesystem::path& path);

/// Loads both traverses (paths relative to base_dir), builds the ground truth
/// and validates the pair.
DatasetPair resolve_pair(const PairManifest& manifest, const std::filesystem::path& base_dir,
                         bool check_files = false);

void save_mix(const MixSequence& mix, const std::filesystem::path& path);
MixSequence load_mix(const std::filesystem::path& path);

}  // namespace blurbench
