#pragma once

#include <filesystem>

#include "pdfp/types.hpp"

namespace pdfp {

/// Binary PGM (P5), maxval 65535, big-endian 16-bit samples. Values are
/// clamped to [0, 1] and scaled to the full range.
void write_pgm(const Image &img, const std::filesystem::path &path);

/// Reads P5 files with any maxval (8-bit samples when maxval < 256) into [0, 1].
Image read_pgm(const std::filesystem::path &path);

/// One image row per line, comma separated.
void write_image_csv(const Image &img, const std::filesystem::path &path);
Image read_image_csv(const std::filesystem::path &path);

/// Sinogram as CSV with one row per angle (`rays_per_angle` values each).
void write_sinogram_csv(const Vec &b, Index rays_per_angle, const std::filesystem::path &path);

} // namespace pdfp
