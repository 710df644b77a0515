#pragma once

#include <filesystem>

#include "slca/image.hpp"

namespace slca {

// Reads an 8- or 16-bit gray/RGB PNG (alpha ignored). RGB collapses to
// luminance 0.2126 R + 0.7152 G + 0.0722 B; values are scaled to [0, 1].
Image load_grayscale(const std::filesystem::path& path);

// Writes values clamped to [lo, hi] as 8-bit gray.
void save_grayscale(const std::filesystem::path& path, const Image& img, double lo = 0.0, double hi = 1.0);

// Writes an 8-bit RGB PNG; rgb holds height*width*3 bytes.
void save_rgb(const std::filesystem::path& path, int height, int width, const std::vector<unsigned char>& rgb);

}  // namespace slca
