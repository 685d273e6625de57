#include "blurbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "blurbench/rng.hpp"

namespace blurbench {

namespace fs = std::filesystem;
using nlohmann::json;

Traverse::Traverse(std::string name, std::string route, std::set<std::string> conditions,
                   double fps, std::vector<PlaceRef> places)
    : name_(std::move(name)),
      route_(std::move(route)),
      conditions_(std::move(conditions)),
      fps_(fps),
      places_(std::move(places)) {
  if (!(fps_ > 0.0)) {
    raise(Errc::BadManifest, "traverse fps must be positive");
  }
  if (places_.empty()) {
    raise(Errc::BadManifest, "traverse must reference at least one image");
  }
  std::sort(places_.begin(), places_.end(), [](const PlaceRef& a, const PlaceRef& b) {
    return a.level != b.level ? a.level < b.level : a.index < b.index;
  });
  for (const auto& place : places_) {
    if (place.level < 1) {
      raise(Errc::BadManifest, "place level must be >= 1");
    }
    if (place.path.empty()) {
      raise(Errc::BadManifest, "place path must not be empty");
    }
    auto& level_paths = by_level_[place.level];
    if (place.index != static_cast<int>(level_paths.size())) {
      raise(Errc::BadManifest, "place indices at level " + std::to_string(place.level) +
                                   " must be contiguous from 0 without duplicates");
    }
    level_paths.push_back(place.path);
  }
  place_count_ = static_cast<int>(by_level_.begin()->second.size());
  for (const auto& [level, paths] : by_level_) {
    if (static_cast<int>(paths.size()) != place_count_) {
      raise(Errc::BadManifest, "level " + std::to_string(level) +
                                   " holds a different place count than the other levels");
    }
  }
}

std::vector<int> Traverse::levels() const {
  std::vector<int> out;
  out.reserve(by_level_.size());
  for (const auto& [level, paths] : by_level_) {
    out.push_back(level);
  }
  return out;
}

const std::string& Traverse::path_at(int level, int place) const {
  auto it = by_level_.find(level);
  if (it == by_level_.end()) {
    raise(Errc::LevelUnavailable,
          "traverse " + name_ + " has no level " + std::to_string(level));
  }
  if (place < 0 || place >= static_cast<int>(it->second.size())) {
    raise(Errc::BadArgument, "place index " + std::to_string(place) + " out of range");
  }
  return it->second[static_cast<std::size_t>(place)];
}

fs::path Traverse::resolve_path(int level, int place) const {
  fs::path p = path_at(level, place);
  if (p.is_absolute() || base_dir_.empty()) {
    return p;
  }
  return (base_dir_ / p).lexically_normal();
}

bool Traverse::operator==(const Traverse& other) const {
  return name_ == other.name_ && route_ == other.route_ && conditions_ == other.conditions_ &&
         fps_ == other.fps_ && places_ == other.places_;
}

GroundTruth::GroundTruth(std::vector<std::vector<int>> matches, int tolerance)
    : matches_(std::move(matches)), tolerance_(tolerance) {
  if (matches_.empty()) {
    raise(Errc::BadGroundTruth, "ground truth must cover at least one query");
  }
  if (tolerance_ < 0) {
    raise(Errc::BadArgument, "tolerance must be >= 0");
  }
  for (auto& refs : matches_) {
    std::sort(refs.begin(), refs.end());
    refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
    if (!refs.empty()) {
      if (refs.front() < 0) {
        raise(Errc::BadGroundTruth, "reference indices must be >= 0");
      }
      ++positives_;
      max_reference_ = std::max(max_reference_, refs.back());
    }
  }
}

bool GroundTruth::contains(std::size_t query, int reference) const {
  const auto& refs = matches_.at(query);
  return std::binary_search(refs.begin(), refs.end(), reference);
}

GroundTruth identity_ground_truth(int n_query, int tolerance) {
  if (n_query < 1 || tolerance < 0) {
    raise(Errc::BadArgument, "identity ground truth needs n_query >= 1 and tolerance >= 0");
  }
  std::vector<std::vector<int>> matches(static_cast<std::size_t>(n_query));
  for (int i = 0; i < n_query; ++i) {
    const int lo = std::max(0, i - tolerance);
    const int hi = std::min(n_query - 1, i + tolerance);
    for (int j = lo; j <= hi; ++j) {
      matches[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  return GroundTruth(std::move(matches), tolerance);
}

GroundTruth load_correspondence(const fs::path& path, int n_query, int tolerance) {
  if (n_query < 1) {
    raise(Errc::BadArgument, "n_query must be >= 1");
  }
  if (!fs::exists(path)) {
    raise(Errc::MissingImage, "correspondence file not found: " + path.string());
  }
  std::ifstream in(path);
  if (!in) {
    raise(Errc::Io, "cannot open " + path.string());
  }
  std::vector<std::vector<int>> matches(static_cast<std::size_t>(n_query));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::istringstream fields(line);
    long long q = -1, lo = -1, hi = -1;
    if (!(fields >> q >> lo >> hi)) {
      raise(Errc::BadManifest,
            path.string() + ":" + std::to_string(line_no) + ": expected 'query<TAB>low<TAB>high'");
    }
    if (q < 0 || q >= n_query || lo < 0 || hi < lo) {
      raise(Errc::BadManifest,
            path.string() + ":" + std::to_string(line_no) + ": indices out of range");
    }
    for (long long r = lo; r <= hi; ++r) {
      matches[static_cast<std::size_t>(q)].push_back(static_cast<int>(r));
    }
  }
  return GroundTruth(std::move(matches), tolerance);
}

DatasetPair build_pair(const Traverse& query, int query_level, const Traverse& reference,
                       GroundTruth gt, int reference_level) {
  if (!query.has_level(query_level)) {
    raise(Errc::LevelUnavailable,
          "query traverse " + query.name() + " has no level " + std::to_string(query_level));
  }
  if (!reference.has_level(reference_level)) {
    raise(Errc::LevelUnavailable, "reference traverse " + reference.name() + " has no level " +
                                      std::to_string(reference_level));
  }
  if (gt.query_count() != static_cast<std::size_t>(query.place_count())) {
    raise(Errc::BadGroundTruth,
          "ground truth covers " + std::to_string(gt.query_count()) + " queries, traverse has " +
              std::to_string(query.place_count()) + " places");
  }
  if (gt.max_reference() >= reference.place_count()) {
    raise(Errc::BadGroundTruth, "ground truth references place " +
                                    std::to_string(gt.max_reference()) +
                                    " beyond the reference traverse");
  }

  std::set<std::string> conditions;
  std::set_symmetric_difference(query.conditions().begin(), query.conditions().end(),
                                reference.conditions().begin(), reference.conditions().end(),
                                std::inserter(conditions, conditions.begin()));
  if (query_level > 1) {
    conditions.insert("MB");
  }

  DatasetPair pair{query.name() + "_vs_" + reference.name(),
                   query,
                   query_level,
                   reference,
                   reference_level,
                   std::move(gt),
                   std::move(conditions)};
  return pair;
}

MixSequence build_shuffled_mix(const Traverse& traverse, const std::map<int, double>& proportions,
                               std::uint64_t seed) {
  if (proportions.empty()) {
    raise(Errc::BadArgument, "proportions must name at least one level");
  }
  double total = 0.0;
  for (const auto& [level, fraction] : proportions) {
    if (!traverse.has_level(level)) {
      raise(Errc::LevelUnavailable,
            "traverse " + traverse.name() + " has no level " + std::to_string(level));
    }
    if (fraction < 0.0) {
      raise(Errc::BadArgument, "fractions must be >= 0");
    }
    total += fraction;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    raise(Errc::BadArgument, "fractions must sum to 1");
  }

  const int place_count = traverse.place_count();

  // Largest-remainder allocation; leftover goes to the biggest fractional
  // parts, ties to the lower level.
  struct Share {
    int level;
    std::size_t base;
    double remainder;
  };
  std::vector<Share> shares;
  std::size_t assigned = 0;
  for (const auto& [level, fraction] : proportions) {
    const double exact = fraction * place_count;
    const double base = std::floor(exact);
    shares.push_back({level, static_cast<std::size_t>(base), exact - base});
    assigned += static_cast<std::size_t>(base);
  }
  std::size_t leftover = static_cast<std::size_t>(place_count) - assigned;
  std::vector<std::size_t> order(shares.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (shares[a].remainder != shares[b].remainder) {
      return shares[a].remainder > shares[b].remainder;
    }
    return shares[a].level < shares[b].level;
  });
  for (std::size_t i = 0; i < order.size() && leftover > 0; ++i, --leftover) {
    ++shares[order[i]].base;
  }

  std::vector<int> level_by_slot;
  level_by_slot.reserve(static_cast<std::size_t>(place_count));
  for (const auto& share : shares) {  // shares follow ascending level order
    level_by_slot.insert(level_by_slot.end(), share.base, share.level);
  }

  std::vector<int> perm(static_cast<std::size_t>(place_count));
  for (int i = 0; i < place_count; ++i) perm[static_cast<std::size_t>(i)] = i;
  Lcg64 rng(seed);
  fisher_yates(perm, rng);

  std::vector<int> level_of_place(static_cast<std::size_t>(place_count));
  for (std::size_t slot = 0; slot < perm.size(); ++slot) {
    level_of_place[static_cast<std::size_t>(perm[slot])] = level_by_slot[slot];
  }

  MixSequence mix;
  mix.seed = seed;
  mix.proportions = proportions;
  mix.entries.reserve(static_cast<std::size_t>(place_count));
  for (int place = 0; place < place_count; ++place) {
    mix.entries.push_back({place, level_of_place[static_cast<std::size_t>(place)]});
  }
  return mix;
}

// --- manifests ---

namespace {

json read_json_file(const fs::path& path, Errc missing_code) {
  if (!fs::exists(path)) {
    raise(missing_code, "file not found: " + path.string());
  }
  std::ifstream in(path);
  if (!in) {
    raise(Errc::Io, "cannot open " + path.string());
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    raise(Errc::BadManifest, "not valid JSON: " + path.string());
  }
  return doc;
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    raise(Errc::Io, "cannot write " + path.string());
  }
  out << text;
}

const json& require(const json& doc, const char* key, const fs::path& path) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    raise(Errc::BadManifest, path.string() + ": missing field '" + key + "'");
  }
  return *it;
}

}  // namespace

void save_traverse_manifest(const Traverse& traverse, const fs::path& path) {
  json doc;
  doc["name"] = traverse.name();
  doc["route"] = traverse.route();
  doc["conditions"] = traverse.conditions();
  doc["fps"] = traverse.fps();
  doc["levels"] = traverse.levels();
  json places = json::array();
  for (const auto& place : traverse.places()) {
    places.push_back({{"index", place.index}, {"level", place.level}, {"path", place.path}});
  }
  doc["places"] = std::move(places);
  write_text_file(path, doc.dump(2) + "\n");
}

Traverse load_traverse_manifest(const fs::path& path, bool check_files) {
  const json doc = read_json_file(path, Errc::MissingImage);
  try {
    std::set<std::string> conditions;
    for (const auto& tag : require(doc, "conditions", path)) {
      conditions.insert(tag.get<std::string>());
    }
    std::vector<PlaceRef> places;
    for (const auto& entry : require(doc, "places", path)) {
      places.push_back({entry.at("index").get<int>(), entry.at("level").get<int>(),
                        entry.at("path").get<std::string>()});
    }
    Traverse traverse(require(doc, "name", path).get<std::string>(),
                      require(doc, "route", path).get<std::string>(), std::move(conditions),
                      require(doc, "fps", path).get<double>(), std::move(places));
    const auto declared = require(doc, "levels", path).get<std::vector<int>>();
    if (declared != traverse.levels()) {
      raise(Errc::BadManifest,
            path.string() + ": declared levels do not match the place entries");
    }
    traverse.set_base_dir(path.has_parent_path() ? path.parent_path() : fs::path("."));
    if (check_files) {
      for (const auto& place : traverse.places()) {
        const fs::path img = traverse.resolve_path(place.level, place.index);
        if (!fs::exists(img)) {
          raise(Errc::MissingImage, "manifest references absent image: " + img.string());
        }
      }
    }
    return traverse;
  } catch (const json::exception& e) {
    raise(Errc::BadManifest, path.string() + ": " + e.what());
  }
}

void save_pair_manifest(const PairManifest& manifest, const fs::path& path) {
  json gt;
  gt["tolerance"] = manifest.ground_truth.tolerance;
  if (manifest.ground_truth.identity) {
    gt["identity"] = true;
  } else if (!manifest.ground_truth.file.empty()) {
    gt["file"] = manifest.ground_truth.file;
  } else if (manifest.ground_truth.matches) {
    gt["matches"] = *manifest.ground_truth.matches;
  }
  json doc;
  doc["name"] = manifest.name;
  doc["query"] = {{"manifest", manifest.query_manifest}, {"level", manifest.query_level}};
  doc["reference"] = {{"manifest", manifest.reference_manifest},
                      {"level", manifest.reference_level}};
  doc["ground_truth"] = std::move(gt);
  write_text_file(path, doc.dump(2) + "\n");
}

PairManifest load_pair_manifest(const fs::path& path) {
  const json doc = read_json_file(path, Errc::MissingImage);
  try {
    PairManifest manifest;
    manifest.name = doc.value("name", "");
    const json& q = require(doc, "query", path);
    manifest.query_manifest = q.at("manifest").get<std::string>();
    manifest.query_level = q.value("level", 1);
    const json& r = require(doc, "reference", path);
    manifest.reference_manifest = r.at("manifest").get<std::string>();
    manifest.reference_level = r.value("level", 1);
    const json& gt = require(doc, "ground_truth", path);
    manifest.ground_truth.tolerance = gt.value("tolerance", 1);
    manifest.ground_truth.identity = gt.value("identity", false);
    manifest.ground_truth.file = gt.value("file", "");
    if (gt.contains("matches")) {
      manifest.ground_truth.matches = gt.at("matches").get<std::vector<std::vector<int>>>();
    }
    const int sources = (manifest.ground_truth.identity ? 1 : 0) +
                        (manifest.ground_truth.file.empty() ? 0 : 1) +
                        (manifest.ground_truth.matches ? 1 : 0);
    if (sources != 1) {
      raise(Errc::BadManifest,
            path.string() + ": ground_truth needs exactly one of identity/file/matches");
    }
    return manifest;
  } catch (const json::exception& e) {
    raise(Errc::BadManifest, path.string() + ": " + e.what());
  }
}

DatasetPair resolve_pair(const PairManifest& manifest, const fs::path& base_dir,
                         bool check_files) {
  const auto resolve = [&](const std::string& rel) {
    fs::path p(rel);
    return p.is_absolute() || base_dir.empty() ? p : (base_dir / p).lexically_normal();
  };
  Traverse query = load_traverse_manifest(resolve(manifest.query_manifest), check_files);
  Traverse reference = load_traverse_manifest(resolve(manifest.reference_manifest), check_files);

  const int n_query = query.place_count();
  const int tolerance = manifest.ground_truth.tolerance;
  std::optional<GroundTruth> gt;
  if (manifest.ground_truth.identity) {
    if (query.place_count() != reference.place_count()) {
      raise(Errc::BadGroundTruth,
            "identity ground truth needs equal query/reference place counts");
    }
    gt = identity_ground_truth(n_query, tolerance);
  } else if (!manifest.ground_truth.file.empty()) {
    gt = load_correspondence(resolve(manifest.ground_truth.file), n_query, tolerance);
  } else if (manifest.ground_truth.matches) {
    gt = GroundTruth(*manifest.ground_truth.matches, tolerance);
  } else {
    raise(Errc::BadManifest, "pair manifest declares no ground truth");
  }

  DatasetPair pair = build_pair(query, manifest.query_level, reference, std::move(*gt),
                                manifest.reference_level);
  if (!manifest.name.empty()) {
    pair.name = manifest.name;
  }
  return pair;
}

void save_mix(const MixSequence& mix, const fs::path& path) {
  json doc;
  doc["seed"] = mix.seed;
  json props;
  for (const auto& [level, fraction] : mix.proportions) {
    props[std::to_string(level)] = fraction;
  }
  doc["proportions"] = std::move(props);
  json entries = json::array();
  for (const auto& entry : mix.entries) {
    entries.push_back({{"place", entry.place}, {"level", entry.level}});
  }
  doc["entries"] = std::move(entries);
  write_text_file(path, doc.dump(2) + "\n");
}

MixSequence load_mix(const fs::path& path) {
  const json doc = read_json_file(path, Errc::MissingImage);
  try {
    MixSequence mix;
    mix.seed = require(doc, "seed", path).get<std::uint64_t>();
    for (const auto& [key, value] : require(doc, "proportions", path).items()) {
      mix.proportions[std::stoi(key)] = value.get<double>();
    }
    for (const auto& entry : require(doc, "entries", path)) {
      mix.entries.push_back({entry.at("place").get<int>(), entry.at("level").get<int>()});
    }
    std::vector<bool> seen(mix.entries.size(), false);
    for (const auto& entry : mix.entries) {
      if (entry.place < 0 || entry.place >= static_cast<int>(mix.entries.size()) ||
          seen[static_cast<std::size_t>(entry.place)] || entry.level < 1) {
        raise(Errc::BadManifest, path.string() + ": entries must form a permutation of places");
      }
      seen[static_cast<std::size_t>(entry.place)] = true;
    }
    return mix;
  } catch (const json::exception& e) {
    raise(Errc::BadManifest, path.string() + ": " + e.what());
  } catch (const std::invalid_argument&) {
    raise(Errc::BadManifest, path.string() + ": proportion keys must be integer levels");
  }
}

}  // namespace blurbench
