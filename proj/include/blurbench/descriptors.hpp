#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "blurbench/image.hpp"

namespace blurbench {

/// Fixed-dimension descriptor with the (place, level) identity of its image.
struct Descriptor {
  std::vector<float> values;
  int place = 0;
  int level = 1;
  std::string source;  // image file the descriptor came from, when known

  bool operator==(const Descriptor&) const = default;
};

/// Descriptors aligned to place indices, one per place.
struct DescriptorSet {
  std::string method;
  int dim = 0;
  std::vector<Descriptor> items;

  std::size_t size() const noexcept { return items.size(); }
};

/// Raises unless every descriptor has dimension set.dim and dim >= 1.
void validate_set(const DescriptorSet& set);

/// SAD preprocessing: grayscale, box-downsample, patchwise mean/std
/// normalization (SeqSLAM convention).
struct SadConfig {
  int down_w = 64;
  int down_h = 32;
  int patch = 8;
};

Descriptor extract_sad(const Image& img, const SadConfig& cfg = {});

enum class Metric { NegMad, Cosine };

Metric metric_from_string(const std::string& name);
const char* to_string(Metric metric) noexcept;

/// neg_mad: -(1/d) * sum |a_i - b_i|, so identical descriptors score 0.
/// cosine: a.b / (|a||b|), 0 when either vector is zero.
double similarity(const Descriptor& a, const Descriptor& b, Metric metric);

/// Binary descriptor file: magic "BBDSC1\0\0", u32 dim, u32 count, then
/// count*dim little-endian float32. A sidecar "<path>.tsv" lists
/// "index<TAB>level<TAB>source_path" per descriptor.
void save_descriptor_set(const DescriptorSet& set, const std::filesystem::path& path);
DescriptorSet load_descriptor_set(const std::filesystem::path& path);

}  // namespace blurbench
