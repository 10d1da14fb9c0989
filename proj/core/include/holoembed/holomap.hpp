#pragma once

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "holoembed/complex2.hpp"

namespace holoembed {

// Leaf kinds of the symbolic map algebra. Maps stay symbolic trees so long
// compositions re-evaluate exactly at fresh points.

/// (z, w) -> (fz z, fw w); nonzero factors.
struct DiagonalContraction {
    cplx fz, fw;
};

/// (z, w) -> (z + c1 w, w + c2 z); |c1 c2| = 1 is rejected.
struct LinearCross {
    cplx c1, c2;
};

/// (z, w) -> (a z + b w, c z + d w); invertible.
struct LinearGeneral {
    cplx a, b, c, d;
};

struct Translation {
    Vec2c offset;
};

/// axis 0: (z, w + g(z)); axis 1: (z + g(w), w), where
/// g(x) = polyval(coeffs, (x - center) / scale), coefficients lowest first.
/// The affine recentering keeps high-degree fits evaluable without blowup.
struct ShearPoly {
    int axis;
    std::vector<cplx> coeffs;
    cplx center = 0.0;
    double scale = 1.0;
};

/// (z, w) -> (z, w + sum_i a_i / (z - p_i)); an embedding off the pole fibers.
struct RationalShear {
    std::vector<cplx> poles;
    std::vector<cplx> coeffs;
};

/// (z, w) -> (z e^{h(zw)}, w e^{-h(zw)}) with h(u) = sum_k h2[k] u^{k+2}.
/// Storing coefficients from degree 2 makes h(0) = h'(0) = 0 structural.
struct Twist {
    std::vector<cplx> h2;
};

class HoloMap;

/// Ordered composition; factors[0] is applied first.
struct Composition {
    std::vector<HoloMap> factors;
};

/// First-coordinate values whose fibers the map is undefined on.
struct MapDomain {
    std::vector<cplx> excluded_fibers;
    bool everywhere_defined() const { return excluded_fibers.empty(); }
};

class HoloMap {
  public:
    using Node = std::variant<DiagonalContraction, LinearCross, LinearGeneral, Translation,
                              ShearPoly, RationalShear, Twist, Composition>;

    HoloMap() : HoloMap(identity()) {}

    static HoloMap identity();
    static HoloMap contraction(cplx fz, cplx fw);
    static HoloMap linear_cross(cplx c1, cplx c2);
    static HoloMap linear(cplx a, cplx b, cplx c, cplx d);
    static HoloMap translation(Vec2c offset);
    static HoloMap shear_poly(int axis, std::vector<cplx> coeffs);
    static HoloMap shear_poly_scaled(int axis, std::vector<cplx> coeffs, cplx center,
                                     double scale);
    static HoloMap rational_shear(std::vector<cplx> poles, std::vector<cplx> coeffs);
    static HoloMap twist(std::vector<cplx> h2);
    static HoloMap composition(std::vector<HoloMap> in_application_order);

    const Node& node() const { return *node_; }

    Vec2c eval(const Vec2c& x) const;

    /// Symbolic inverse; throws NonInvertibleError on rational-shear leaves.
    HoloMap inverse() const;

    /// Pipeline order: (this.then(g))(x) = g(this(x)).
    HoloMap then(const HoloMap& next) const;

    bool has_rational_shear() const;
    MapDomain domain() const;

    /// Distance to the identity, sup of ||F(x) - x|| over sampled ||x|| <= r.
    double identity_distance(double r = 1.0, int samples_per_axis = 6) const;

    /// Lossless JSON round trip of the expression tree.
    std::string to_json() const;
    static HoloMap from_json(const std::string& text);

  private:
    explicit HoloMap(Node n);
    std::shared_ptr<const Node> node_;
};

/// Central-difference complex Jacobian determinant; h defaults to
/// 1e-5 * (1 + ||x||).
cplx jacobian_det(const HoloMap& f, const Vec2c& x, double h = -1.0);

/// Builds the Proposition-style rational shear from boundary pole data
/// (marked first coordinates and shear coefficients).
HoloMap rational_shear_from_boundary(const std::vector<std::pair<cplx, cplx>>& pole_data,
                                     const std::vector<cplx>& coeffs);

/// Boundary curve near its marked point, for shear-coefficient selection.
/// Samples carry parameter values on both sides of t = 0 (never 0 itself).
struct ShearCurveData {
    Vec2c marked;       // (z_i(0), w_i(0))
    cplx tangent_z;     // c_i = dz_i/dt(0), nonzero
    std::vector<std::pair<double, Vec2c>> near_samples;
};

struct ShearCoeffChoice {
    std::vector<cplx> coeffs;
    double min_cross_separation;  // between second-coordinate traces of distinct halves
    double worst_monotone_step;   // smallest increase of |pi2| toward t = 0
};

/// Phases spread the 2m asymptotic rays uniformly; the choice is verified on
/// the supplied near-samples (|pi2| strictly increasing toward t = 0, traces
/// pairwise disjoint). Throws SearchExhaustedError naming the failing pair.
ShearCoeffChoice choose_shear_coeffs(const std::vector<ShearCurveData>& curves,
                                     double magnitude = 1.0);

}  // namespace holoembed
