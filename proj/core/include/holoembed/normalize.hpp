#pragma once

#include <cstdint>
#include <span>

#include "holoembed/curve.hpp"
#include "holoembed/holomap.hpp"
#include "holoembed/report.hpp"

namespace holoembed {

/// A boundary point singled out by a normalization stage.
struct MarkedPoint {
    Vec2c point;
    std::size_t boundary_index = 0;
    double t = 0.0;
};

/// Outcome of a coordinate normalization: the near-identity map that was
/// applied, the points it marked, and the margins that certify it.
struct NormalizationResult {
    HoloMap applied;
    std::vector<MarkedPoint> marked;
    double max_gap = 0.0;            // boundary maximum gap (unique-max marking stages)
    double fiber_clearance = 0.0;    // distance of other samples to the marked fiber
    double tangent_clearance = 0.0;  // normalized tangent-component floor
    VerificationReport report;
};

struct TangentOptions {
    double draw_radius = 0.1;   // rejection-sampling disc for the coefficient draws
    int max_retries = 64;
    double threshold = 1e-3;    // on |component| / ||tangent||
    std::uint64_t seed = 20240801;
    std::size_t samples = 512;
    int verify_factor = 10;     // re-verification density multiplier
};

/// Draws a near-identity map (z + c1 w, w + c2 z) until both tangent
/// components of every boundary stay away from zero; c = 0 is tried first.
/// The measure-zero bad set makes each draw succeed with probability one.
NormalizationResult normalize_tangents(std::span<const ParamCurve> boundaries,
                                    const TangentOptions& opts = {});

struct MarkMaxOptions {
    double theta0 = 0.1;            // largest rotation tried
    int theta_steps = 14;           // decreasing sequence length
    double tube_rel = 1e-2;         // fiber tube radius / surface diameter
    double min_gap_rel = 1e-9;      // acceptance gap relative to the Re-z spread
    double min_regularity = 1e-4;
    std::size_t boundary_samples = 2048;
    int verify_factor = 10;
};

/// Finds the boundary point maximizing Re(pi1); when the sampled maximum is
/// not unique (or its fiber is dirty) both real axes are rotated through a
/// decreasing sequence of angles until it is. Margins are re-checked at
/// verify_factor times the sampling density before acceptance.
NormalizationResult mark_unique_max(std::span<const Vec2c> surface,
                                    std::span<const ParamCurve> boundaries,
                                    const MarkMaxOptions& opts = {});

struct TwistOptions {
    int amplitude_steps = 30;       // log-spaced twist strengths
    double min_ratio = 1.2;         // bd2 max must beat bd1 max by this factor
    std::size_t boundary_samples = 2048;
    MarkMaxOptions mark;
};

struct TwistResult {
    HoloMap twist;                  // h(u) = c u^2 twist
    HoloMap align;                  // unit phase rotation of the z axis
    NormalizationResult second_mark;  // unique-max marking on the twisted surface (bd2 point)
    VerificationReport report;
};

/// Searches c in h(u) = c u^2 until |z e^{h(zw)}| peaks on the second
/// boundary, then re-runs unique-max marking on the twisted surface to mark the bd2 point.
/// Expects pi1(p1) = 0 (translation applied by the caller) so the twist fixes
/// the fiber through the first marked point.
TwistResult twist_to_second_boundary(std::span<const Vec2c> surface, const ParamCurve& bd1,
                                     const ParamCurve& bd2, const TwistOptions& opts = {});

struct HypothesesOptions {
    double tube_rel = 1e-2;
    double min_regularity = 1e-4;
    std::size_t boundary_samples = 4096;
};

/// The embedding hypotheses at each marked point: no other surface or boundary
/// sample inside the fiber tube, and the boundary tangent's pi1 component
/// bounded away from zero. Failure is a report outcome with a witness.
VerificationReport verify_fiber_hypotheses(std::span<const Vec2c> surface,
                                                  std::span<const ParamCurve> boundaries,
                                                  std::span<const MarkedPoint> marked,
                                                  const HypothesesOptions& opts = {});

}  // namespace holoembed
