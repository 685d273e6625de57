#include "blurbench/descriptors.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace blurbench {

namespace fs = std::filesystem;

void validate_set(const DescriptorSet& set) {
  if (set.dim < 1) {
    raise(Errc::BadDimensions, "descriptor dimension must be >= 1");
  }
  if (set.items.empty()) {
    raise(Errc::BadArgument, "descriptor set must hold at least one descriptor");
  }
  for (const auto& item : set.items) {
    if (static_cast<int>(item.values.size()) != set.dim) {
      raise(Errc::BadDimensions, "descriptor dimension mismatch within set");
    }
    for (float v : item.values) {
      if (!std::isfinite(v)) {
        raise(Errc::BadArgument, "descriptor entries must be finite");
      }
    }
  }
}

Descriptor extract_sad(const Image& img, const SadConfig& cfg) {
  if (cfg.down_w < 1 || cfg.down_h < 1 || cfg.patch < 1 || cfg.down_w % cfg.patch != 0 ||
      cfg.down_h % cfg.patch != 0) {
    raise(Errc::BadConfig, "down_w and down_h must be positive multiples of patch");
  }
  const Image small = downsample_box(to_grayscale(img), cfg.down_w, cfg.down_h);

  std::vector<float> values(static_cast<std::size_t>(cfg.down_w) * cfg.down_h, 0.0f);
  for (int ty = 0; ty < cfg.down_h; ty += cfg.patch) {
    for (int tx = 0; tx < cfg.down_w; tx += cfg.patch) {
      double sum = 0.0;
      double sum_sq = 0.0;
      for (int y = ty; y < ty + cfg.patch; ++y) {
        for (int x = tx; x < tx + cfg.patch; ++x) {
          const double v = small.at(y, x);
          sum += v;
          sum_sq += v * v;
        }
      }
      const double count = static_cast<double>(cfg.patch) * cfg.patch;
      const double mean = sum / count;
      const double variance = std::max(0.0, sum_sq / count - mean * mean);
      const double stddev = std::sqrt(variance);
      if (stddev < 1e-12) {
        continue;  // flat tile stays all-zero
      }
      for (int y = ty; y < ty + cfg.patch; ++y) {
        for (int x = tx; x < tx + cfg.patch; ++x) {
          values[static_cast<std::size_t>(y) * cfg.down_w + x] =
              static_cast<float>((small.at(y, x) - mean) / stddev);
        }
      }
    }
  }
  Descriptor d;
  d.values = std::move(values);
  return d;
}

Metric metric_from_string(const std::string& name) {
  if (name == "neg_mad") return Metric::NegMad;
  if (name == "cosine") return Metric::Cosine;
  raise(Errc::BadArgument, "unknown metric '" + name + "' (expected neg_mad or cosine)");
}

const char* to_string(Metric metric) noexcept {
  return metric == Metric::NegMad ? "neg_mad" : "cosine";
}

double similarity(const Descriptor& a, const Descriptor& b, Metric metric) {
  if (a.values.size() != b.values.size() || a.values.empty()) {
    raise(Errc::BadDimensions, "descriptors must share a dimension >= 1");
  }
  const std::size_t d = a.values.size();
  if (metric == Metric::NegMad) {
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      total += std::abs(static_cast<double>(a.values[i]) - b.values[i]);
    }
    return -total / static_cast<double>(d);
  }
  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    dot += static_cast<double>(a.values[i]) * b.values[i];
    norm_a += static_cast<double>(a.values[i]) * a.values[i];
    norm_b += static_cast<double>(b.values[i]) * b.values[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) {
    return 0.0;
  }
  return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

namespace {

constexpr char kMagic[8] = {'B', 'B', 'D', 'S', 'C', '1', '\0', '\0'};

void put_u32(std::string& out, std::uint32_t value) {
  out.push_back(static_cast<char>(value & 0xff));
  out.push_back(static_cast<char>((value >> 8) & 0xff));
  out.push_back(static_cast<char>((value >> 16) & 0xff));
  out.push_back(static_cast<char>((value >> 24) & 0xff));
}

std::uint32_t get_u32(const char* p) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(p[0])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(p[1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(p[2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(p[3])) << 24;
}

fs::path sidecar_path(const fs::path& path) {
  fs::path p = path;
  p += ".tsv";
  return p;
}

}  // namespace

void save_descriptor_set(const DescriptorSet& set, const fs::path& path) {
  validate_set(set);

  std::string payload;
  payload.reserve(16 + set.items.size() * static_cast<std::size_t>(set.dim) * 4);
  payload.append(kMagic, sizeof(kMagic));
  put_u32(payload, static_cast<std::uint32_t>(set.dim));
  put_u32(payload, static_cast<std::uint32_t>(set.items.size()));
  for (const auto& item : set.items) {
    for (float v : item.values) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      put_u32(payload, bits);
    }
  }

  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(payload.data(), static_cast<std::streamsize>(payload.size()))) {
    raise(Errc::Io, "cannot write " + path.string());
  }

  std::ostringstream sidecar;
  for (const auto& item : set.items) {
    sidecar << item.place << '\t' << item.level << '\t' << item.source << '\n';
  }
  std::ofstream side(sidecar_path(path), std::ios::binary);
  if (!side || !(side << sidecar.str())) {
    raise(Errc::Io, "cannot write " + sidecar_path(path).string());
  }
}

DescriptorSet load_descriptor_set(const fs::path& path) {
  if (!fs::exists(path)) {
    raise(Errc::MissingImage, "descriptor file not found: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(Errc::Io, "cannot open " + path.string());
  }
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (data.size() < sizeof(kMagic)) {
    raise(Errc::Truncated, path.string() + " is shorter than the magic header");
  }
  if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
    raise(Errc::BadFormat, path.string() + " is not a descriptor file (bad magic)");
  }
  if (data.size() < 16) {
    raise(Errc::Truncated, path.string() + " is missing the dimension/count header");
  }
  const std::uint32_t dim = get_u32(data.data() + 8);
  const std::uint32_t count = get_u32(data.data() + 12);
  if (dim == 0 || count == 0) {
    raise(Errc::BadFormat, path.string() + " declares an empty set");
  }
  const std::size_t expected = static_cast<std::size_t>(dim) * count * 4;
  const std::size_t payload = data.size() - 16;
  if (payload < expected) {
    raise(Errc::Truncated, path.string() + " payload holds " + std::to_string(payload / 4) +
                               " floats, header declares " + std::to_string(expected / 4));
  }
  if (payload > expected) {
    raise(Errc::BadFormat, path.string() + " payload exceeds the declared count*dim");
  }

  DescriptorSet set;
  set.dim = static_cast<int>(dim);
  set.items.resize(count);
  const char* p = data.data() + 16;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto& item = set.items[i];
    item.place = static_cast<int>(i);
    item.values.resize(dim);
    for (std::uint32_t j = 0; j < dim; ++j, p += 4) {
      const std::uint32_t bits = get_u32(p);
      std::memcpy(&item.values[j], &bits, sizeof(float));
    }
  }

  const fs::path side = sidecar_path(path);
  if (fs::exists(side)) {
    std::ifstream sidecar(side);
    std::string line;
    std::size_t row = 0;
    while (std::getline(sidecar, line)) {
      if (line.empty()) {
        continue;
      }
      if (row >= set.items.size()) {
        raise(Errc::BadFormat, side.string() + " lists more rows than the descriptor count");
      }
      std::istringstream fields(line);
      std::string source;
      if (!(fields >> set.items[row].place >> set.items[row].level)) {
        raise(Errc::BadFormat, side.string() + ": malformed line " + std::to_string(row + 1));
      }
      std::getline(fields, source);
      if (!source.empty() && source.front() == '\t') {
        source.erase(source.begin());
      }
      set.items[row].source = source;
      ++row;
    }
    if (row != set.items.size()) {
      raise(Errc::BadFormat, side.string() + " lists fewer rows than the descriptor count");
    }
  }
  return set;
}

}  // namespace blurbench
