#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "holoembed/complex2.hpp"

namespace holoembed {

inline double point_norm(cplx p) { return std::abs(p); }
inline double point_norm(const Vec2c& p) { return norm2(p); }
inline double point_dist(cplx a, cplx b) { return std::abs(a - b); }
inline double point_dist(const Vec2c& a, const Vec2c& b) { return dist2(a, b); }

/// Sampled boundary curve with per-sample tangent estimates.
///
/// Construction enforces the maximum spacing bound and, when samples carry
/// externally supplied tangents, checks them against central differences.
template <class P>
class Curve {
  public:
    struct Sample {
        double t;
        P point;
        P tangent;
    };

    Curve(std::vector<Sample> samples, bool closed, double max_spacing)
        : samples_(std::move(samples)), closed_(closed), max_spacing_(max_spacing) {
        if (samples_.size() < 2) throw std::invalid_argument("Curve: need at least 2 samples");
        for (std::size_t i = 0; i + 1 < samples_.size(); ++i) {
            if (point_dist(samples_[i].point, samples_[i + 1].point) > max_spacing_)
                throw std::invalid_argument("Curve: sample spacing exceeds the bound");
        }
        if (closed_ && point_dist(samples_.back().point, samples_.front().point) > max_spacing_)
            throw std::invalid_argument("Curve: closing segment exceeds the spacing bound");
    }

    const std::vector<Sample>& samples() const { return samples_; }
    bool closed() const { return closed_; }
    double max_spacing() const { return max_spacing_; }

    /// Largest deviation between stored tangents and central differences,
    /// relative to the local tangent magnitude.
    double tangent_consistency() const {
        double worst = 0.0;
        const std::size_t n = samples_.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (!closed_ && (i == 0 || i + 1 == n)) continue;
            const auto& prev = samples_[(i + n - 1) % n];
            const auto& next = samples_[(i + 1) % n];
            double dt = next.t - prev.t;
            if (closed_ && i == 0) dt = next.t - prev.t + period_hint_;
            if (closed_ && i + 1 == n) dt = next.t + period_hint_ - prev.t;
            if (dt == 0.0) continue;
            const P fd = (1.0 / dt) * (next.point - prev.point);
            const double scale = point_norm(samples_[i].tangent) + point_norm(fd) + 1e-300;
            worst = std::max(worst, point_dist(fd, samples_[i].tangent) / scale);
        }
        return worst;
    }

    void set_period_hint(double period) { period_hint_ = period; }

  private:
    std::vector<Sample> samples_;
    bool closed_;
    double max_spacing_;
    double period_hint_ = 0.0;
};

using PlanarCurve = Curve<cplx>;
using BoundaryCurve = Curve<Vec2c>;

/// Analytic curve in C^2 that can be resampled at any density; the workhorse
/// behind every 10x re-verification sweep.
struct ParamCurve {
    std::function<Vec2c(double)> f;
    double t0 = 0.0;
    double t1 = 1.0;
    bool closed = true;

    Vec2c at(double t) const { return f(t); }

    /// Tangent by central differences with a parameter step scaled to the interval.
    Vec2c tangent(double t) const {
        const double h = 1e-6 * (t1 - t0);
        return (1.0 / (2.0 * h)) * (f(t + h) - f(t - h));
    }

    BoundaryCurve sample(std::size_t n) const;

    /// The curve pushed through a map of C^2.
    ParamCurve mapped(std::function<Vec2c(const Vec2c&)> m) const {
        ParamCurve out;
        out.f = [base = f, m = std::move(m)](double t) { return m(base(t)); };
        out.t0 = t0;
        out.t1 = t1;
        out.closed = closed;
        return out;
    }
};

/// Planar circle t -> c + r e^{2 pi i t}, t in [0, 1).
struct CircleCurve {
    cplx center;
    double radius;

    cplx at(double t) const;
    cplx tangent(double t) const;
    PlanarCurve sample(std::size_t n) const;
};

}  // namespace holoembed
