#pragma once

#include <cstdint>
#include <vector>

namespace blurbench {

/// 64-bit LCG (Knuth MMIX constants). The exact recurrence and the shuffle
/// below are part of the file-format contract: mixes must reproduce
/// bit-for-bit across implementations given the same seed.
class Lcg64 {
 public:
  explicit Lcg64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return state_;
  }

  /// Uniform in [0, bound) by modulo reduction.
  std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

/// In-place Fisher-Yates, high index down, partner drawn as next() % (i+1).
template <typename T>
void fisher_yates(std::vector<T>& values, Lcg64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace blurbench
