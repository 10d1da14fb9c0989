#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "holoembed/curve.hpp"
#include "holoembed/lattice.hpp"

namespace holoembed {

/// Removed closed disc on the torus. Radius must stay below half the systole
/// so the disc embeds in the quotient.
struct TorusDisc {
    cplx center;
    double radius;
};

/// Removed single point.
struct TorusPuncture {
    cplx at;
};

using RemovedRegion = std::variant<TorusDisc, TorusPuncture>;

cplx region_center(const RemovedRegion& r);
double region_radius(const RemovedRegion& r);

/// Torus minus one or two discs/points, the surfaces of the embedding theorems.
class TorusSurface {
  public:
    TorusSurface(Lattice lattice, std::vector<RemovedRegion> removed);

    const Lattice& lattice() const { return lattice_; }
    const std::vector<RemovedRegion>& removed() const { return removed_; }

    /// Boundary circle of removed region i (punctures have none).
    std::optional<CircleCurve> boundary(std::size_t i) const;

  private:
    Lattice lattice_;
    std::vector<RemovedRegion> removed_;
};

/// Evenly spaced points of the fundamental domain minus exclusion zones.
struct SampleGrid {
    std::vector<cplx> points;   // reduced representatives
    double min_separation = 0;  // guaranteed pairwise distance
    double margin = 0;          // clearance kept from poles and removed regions
};

/// Regular grid of lattice-coordinate step `density` over the fundamental
/// domain, dropping points within `margin` of a lattice point (the Weierstrass
/// pole) or of any removed region. Throws EmptyGridError if nothing survives.
SampleGrid sample_torus_minus(const Lattice& lattice, const std::vector<RemovedRegion>& removed,
                              double density, double margin);

/// Grid rows as CSV (re, im).
std::string grid_csv(const SampleGrid& grid);

/// Exact smallest pairwise distance of a point cloud in C^2 (grid-hashed).
/// Returns the distance and the indices of the closest pair.
struct ClosestPair {
    double dist;
    std::size_t i, j;
};
ClosestPair min_pairwise_distance(const std::vector<Vec2c>& pts);

}  // namespace holoembed
