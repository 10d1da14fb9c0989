#include "holoembed/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "holoembed/errors.hpp"

namespace holoembed {

cplx region_center(const RemovedRegion& r) {
    return std::visit([](const auto& v) -> cplx {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, TorusDisc>) return v.center;
        else return v.at;
    }, r);
}

double region_radius(const RemovedRegion& r) {
    return std::holds_alternative<TorusDisc>(r) ? std::get<TorusDisc>(r).radius : 0.0;
}

TorusSurface::TorusSurface(Lattice lattice, std::vector<RemovedRegion> removed)
    : lattice_(std::move(lattice)), removed_(std::move(removed)) {
    if (removed_.empty() || removed_.size() > 2)
        throw std::invalid_argument("TorusSurface: expected 1 or 2 removed regions");
    for (const auto& r : removed_) {
        if (region_radius(r) >= 0.5 * lattice_.systole())
            throw std::invalid_argument("TorusSurface: disc radius must stay below half the systole");
    }
    for (std::size_t i = 0; i < removed_.size(); ++i)
        for (std::size_t j = i + 1; j < removed_.size(); ++j) {
            const double d = lattice_.torus_dist(region_center(removed_[i]), region_center(removed_[j]));
            if (d <= region_radius(removed_[i]) + region_radius(removed_[j]))
                throw std::invalid_argument("TorusSurface: removed regions must be pairwise disjoint");
        }
}

std::optional<CircleCurve> TorusSurface::boundary(std::size_t i) const {
    const auto& r = removed_.at(i);
    if (!std::holds_alternative<TorusDisc>(r)) return std::nullopt;
    const auto& d = std::get<TorusDisc>(r);
    return CircleCurve{d.center, d.radius};
}

SampleGrid sample_torus_minus(const Lattice& lattice, const std::vector<RemovedRegion>& removed,
                              double density, double margin) {
    if (density <= 0.0 || density >= 1.0)
        throw std::invalid_argument("sample_torus_minus: density must be a lattice-coordinate step in (0,1)");
    if (margin <= 0.0) throw std::invalid_argument("sample_torus_minus: margin must be positive");

    const auto n_steps = static_cast<std::size_t>(std::round(1.0 / density));
    const double h = 1.0 / static_cast<double>(n_steps);

    SampleGrid grid;
    grid.margin = margin;
    grid.min_separation = h * lattice.systole();
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double s = -0.5 + h * (0.5 + static_cast<double>(i));
        for (std::size_t j = 0; j < n_steps; ++j) {
            const double t = -0.5 + h * (0.5 + static_cast<double>(j));
            const cplx z = s * lattice.omega1() + t * lattice.omega2();
            if (std::abs(lattice.reduce(z)) < margin) continue;  // Weierstrass pole at 0 mod X
            bool excluded = false;
            for (const auto& r : removed) {
                if (lattice.torus_dist(z, region_center(r)) < region_radius(r) + margin) {
                    excluded = true;
                    break;
                }
            }
            if (!excluded) grid.points.push_back(z);
        }
    }
    if (grid.points.empty())
        throw EmptyGridError("sample_torus_minus: margin/density left no admissible points");
    return grid;
}

std::string grid_csv(const SampleGrid& grid) {
    std::string out = "re,im\n";
    char buf[80];
    for (const cplx z : grid.points) {
        snprintf(buf, sizeof(buf), "%.17g,%.17g\n", z.real(), z.imag());
        out += buf;
    }
    return out;
}

namespace {

struct CellKey {
    std::int64_t a, b, c, d;
    bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::int64_t v : {k.a, k.b, k.c, k.d}) {
            h ^= static_cast<std::uint64_t>(v);
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

ClosestPair min_pairwise_distance(const std::vector<Vec2c>& pts) {
    if (pts.size() < 2) throw std::invalid_argument("min_pairwise_distance: need >= 2 points");

    // Bounding-box heuristic for the initial cell size; doubles until the
    // best pair found is within one cell, which certifies the minimum.
    Vec2c mn = pts[0], mx = pts[0];
    for (const auto& p : pts) {
        mn = {cplx(std::min(mn.z.real(), p.z.real()), std::min(mn.z.imag(), p.z.imag())),
              cplx(std::min(mn.w.real(), p.w.real()), std::min(mn.w.imag(), p.w.imag()))};
        mx = {cplx(std::max(mx.z.real(), p.z.real()), std::max(mx.z.imag(), p.z.imag())),
              cplx(std::max(mx.w.real(), p.w.real()), std::max(mx.w.imag(), p.w.imag()))};
    }
    const double diam = dist2(mn, mx) + 1e-300;
    double cell = diam / std::max(2.0, std::sqrt(std::sqrt(static_cast<double>(pts.size()))));

    for (int attempt = 0; attempt < 64; ++attempt) {
        std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> buckets;
        auto key_of = [cell](const Vec2c& p) {
            return CellKey{static_cast<std::int64_t>(std::floor(p.z.real() / cell)),
                           static_cast<std::int64_t>(std::floor(p.z.imag() / cell)),
                           static_cast<std::int64_t>(std::floor(p.w.real() / cell)),
                           static_cast<std::int64_t>(std::floor(p.w.imag() / cell))};
        };
        for (std::size_t i = 0; i < pts.size(); ++i) buckets[key_of(pts[i])].push_back(i);

        ClosestPair best{std::numeric_limits<double>::max(), 0, 0};
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const CellKey k = key_of(pts[i]);
            for (std::int64_t da = -1; da <= 1; ++da)
                for (std::int64_t db = -1; db <= 1; ++db)
                    for (std::int64_t dc = -1; dc <= 1; ++dc)
                        for (std::int64_t dd = -1; dd <= 1; ++dd) {
                            auto it = buckets.find({k.a + da, k.b + db, k.c + dc, k.d + dd});
                            if (it == buckets.end()) continue;
                            for (std::size_t j : it->second) {
                                if (j <= i) continue;
                                const double d = dist2(pts[i], pts[j]);
                                if (d < best.dist) best = {d, i, j};
                            }
                        }
        }
        if (best.dist <= cell) return best;
        cell *= 2.0;
    }
    // Dense fallback; only reachable for degenerate clouds.
    ClosestPair best{std::numeric_limits<double>::max(), 0, 0};
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double d = dist2(pts[i], pts[j]);
            if (d < best.dist) best = {d, i, j};
        }
    return best;
}

}  // namespace holoembed
