#pragma once

#include <filesystem>

#include "blurbench/image.hpp"

namespace blurbench {

/// Loads an 8-bit gray or RGB raster (PNG, binary PPM/PGM).
Image load_image(const std::filesystem::path& path);

/// Writes PNG; gray in, gray out.
void save_png(const Image& img, const std::filesystem::path& path);

bool is_supported_raster(const std::filesystem::path& path);

/// Reads a directory of frames whose stems are decimal indices (after an
/// auto-detected shared non-digit prefix) and orders them by that index.
FrameSequence load_frame_sequence(const std::filesystem::path& directory, double fps);

}  // namespace blurbench
