#include "holoembed/svg.hpp"

#include <algorithm>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace holoembed {

namespace {

std::pair<double, double> project(const Vec2c& p, SvgProjection proj) {
    if (proj == SvgProjection::z_plane) return {p.z.real(), p.z.imag()};
    return {p.z.real(), p.w.real()};
}

void append_fmt(std::string& out, const char* fmt, ...) {
    char buf[256];
    va_list args;
    va_start(args, fmt);
    const int n = vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    out.append(buf, buf + std::min<int>(n, int(sizeof(buf)) - 1));
}

}  // namespace

std::string svg_scatter(std::span<const Vec2c> points, SvgProjection projection,
                        std::span<const Vec2c> highlights) {
    if (points.empty()) throw std::invalid_argument("svg_scatter: no points");

    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const Vec2c& p : points) {
        auto [x, y] = project(p, projection);
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    const double pad = 0.05 * std::max({x1 - x0, y1 - y0, 1e-12});
    x0 -= pad;
    x1 += pad;
    y0 -= pad;
    y1 += pad;
    const double sx = 800.0 / (x1 - x0), sy = 800.0 / (y1 - y0);

    std::string out;
    out.reserve(64 * points.size() + 512);
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 800\">\n";
    append_fmt(out, "<!-- window x:[%.6g,%.6g] y:[%.6g,%.6g] -->\n", x0, x1, y0, y1);
    out += "<rect width=\"800\" height=\"800\" fill=\"#ffffff\"/>\n";
    for (const Vec2c& p : points) {
        auto [x, y] = project(p, projection);
        append_fmt(out, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"1.6\" fill=\"#28507a\"/>\n",
                   (x - x0) * sx, 800.0 - (y - y0) * sy);
    }
    for (const Vec2c& p : highlights) {
        auto [x, y] = project(p, projection);
        append_fmt(out,
                   "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"5.0\" fill=\"none\" stroke=\"#c03020\" "
                   "stroke-width=\"2\"/>\n",
                   (x - x0) * sx, 800.0 - (y - y0) * sy);
    }
    out += "</svg>\n";
    return out;
}

std::string svg_heatmap(const EscapeRaster& raster) {
    if (raster.width == 0 || raster.height == 0 ||
        raster.steps.size() != raster.width * raster.height)
        throw std::invalid_argument("svg_heatmap: inconsistent raster");

    const double cw = 800.0 / double(raster.width);
    const double ch = 800.0 / double(raster.height);
    std::string out;
    out.reserve(48 * raster.steps.size() + 512);
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 800\">\n";
    append_fmt(out, "<!-- window x:[%.6g,%.6g] y:[%.6g,%.6g] max_step:%d -->\n", raster.x0,
               raster.x1, raster.y0, raster.y1, raster.max_step);
    for (std::size_t r = 0; r < raster.height; ++r) {
        for (std::size_t c = 0; c < raster.width; ++c) {
            const int s = raster.steps[r * raster.width + c];
            const double f =
                raster.max_step > 0 ? double(s) / double(raster.max_step) : 0.0;
            // dark blue (trapped) to pale yellow (fast escape)
            const int red = int(16.0 + 226.0 * f + 0.5);
            const int green = int(32.0 + 210.0 * f + 0.5);
            const int blue = int(79.0 + 121.0 * f + 0.5);
            append_fmt(out,
                       "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                       "fill=\"#%02x%02x%02x\"/>\n",
                       double(c) * cw, 800.0 - double(r + 1) * ch, cw, ch, red, green, blue);
        }
    }
    out += "</svg>\n";
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_text_file: cannot open " + path.string());
    os.write(content.data(), std::streamsize(content.size()));
}

}  // namespace holoembed
