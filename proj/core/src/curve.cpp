#include "holoembed/curve.hpp"

#include <cmath>
#include <numbers>

namespace holoembed {

BoundaryCurve ParamCurve::sample(std::size_t n) const {
    if (n < 2) throw std::invalid_argument("ParamCurve::sample: need n >= 2");
    std::vector<BoundaryCurve::Sample> samples;
    samples.reserve(n);
    const double span = t1 - t0;
    const double step = closed ? span / double(n) : span / double(n - 1);
    double max_step_dist = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + step * double(i);
        samples.push_back({t, f(t), tangent(t)});
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
        max_step_dist = std::max(max_step_dist, dist2(samples[i].point, samples[i + 1].point));
    if (closed)
        max_step_dist = std::max(max_step_dist, dist2(samples.back().point, samples.front().point));
    BoundaryCurve out(std::move(samples), closed, max_step_dist * 1.5 + 1e-300);
    if (closed) out.set_period_hint(span);
    return out;
}

cplx CircleCurve::at(double t) const {
    const double a = 2.0 * std::numbers::pi * t;
    return center + radius * cplx(std::cos(a), std::sin(a));
}

cplx CircleCurve::tangent(double t) const {
    const double a = 2.0 * std::numbers::pi * t;
    return 2.0 * std::numbers::pi * radius * cplx(-std::sin(a), std::cos(a));
}

PlanarCurve CircleCurve::sample(std::size_t n) const {
    std::vector<PlanarCurve::Sample> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = double(i) / double(n);
        samples.push_back({t, at(t), tangent(t)});
    }
    const double spacing = 2.0 * radius * std::sin(std::numbers::pi / double(n)) * 1.5;
    PlanarCurve out(std::move(samples), true, spacing);
    out.set_period_hint(1.0);
    return out;
}

}  // namespace holoembed
