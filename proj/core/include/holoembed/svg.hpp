#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "holoembed/complex2.hpp"

namespace holoembed {

enum class SvgProjection {
    z_plane,    // (Re z, Im z)
    zw_real,    // (Re z, Re w)
};

/// Escape-step raster over a planar slice.
struct EscapeRaster {
    std::size_t width = 0, height = 0;
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    std::vector<int> steps;  // row-major, height rows of width entries
    int max_step = 1;
};

/// Deterministic scatter plot: fixed 800x800 viewBox, two-decimal
/// coordinates. Throws std::invalid_argument on empty input.
std::string svg_scatter(std::span<const Vec2c> points, SvgProjection projection,
                        std::span<const Vec2c> highlights = {});

/// Deterministic heatmap of an escape raster (one rect per cell).
std::string svg_heatmap(const EscapeRaster& raster);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace holoembed
