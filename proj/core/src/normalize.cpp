#include "holoembed/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "holoembed/errors.hpp"
#include "holoembed/rng.hpp"

namespace holoembed {

namespace {

struct BoundarySample {
    Vec2c point;
    Vec2c tangent;
    std::size_t boundary;
    double t;
};

std::vector<BoundarySample> sweep_boundaries(std::span<const ParamCurve> boundaries,
                                             std::size_t n) {
    std::vector<BoundarySample> out;
    out.reserve(boundaries.size() * n);
    for (std::size_t b = 0; b < boundaries.size(); ++b) {
        const ParamCurve& c = boundaries[b];
        const double span = c.t1 - c.t0;
        const double step = c.closed ? span / double(n) : span / double(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = c.t0 + step * double(i);
            out.push_back({c.at(t), c.tangent(t), b, t});
        }
    }
    return out;
}

double cloud_diameter(std::span<const Vec2c> surface, const std::vector<BoundarySample>& bd) {
    double zr0 = 1e300, zr1 = -1e300, zi0 = 1e300, zi1 = -1e300;
    double wr0 = 1e300, wr1 = -1e300, wi0 = 1e300, wi1 = -1e300;
    auto visit = [&](const Vec2c& x) {
        zr0 = std::min(zr0, x.z.real());
        zr1 = std::max(zr1, x.z.real());
        zi0 = std::min(zi0, x.z.imag());
        zi1 = std::max(zi1, x.z.imag());
        wr0 = std::min(wr0, x.w.real());
        wr1 = std::max(wr1, x.w.real());
        wi0 = std::min(wi0, x.w.imag());
        wi1 = std::max(wi1, x.w.imag());
    };
    for (const auto& x : surface) visit(x);
    for (const auto& s : bd) visit(s.point);
    const double dz = std::hypot(zr1 - zr0, zi1 - zi0);
    const double dw = std::hypot(wr1 - wr0, wi1 - wi0);
    return std::hypot(dz, dw) + 1e-300;
}

// Unitary rotation of both real axes through theta with a phase twist on the
// mixing direction; stays within O(theta) of the identity.
HoloMap axis_rotation(double theta, double phase) {
    const cplx mix = std::polar(1.0, phase);
    return HoloMap::linear(std::cos(theta), std::sin(theta) * mix,
                           -std::sin(theta) * std::conj(mix), std::cos(theta));
}

struct MaxSearch {
    std::size_t arg = 0;
    double best = -1e300;
    double gap = 0.0;              // to the best sample outside the exclusion ball
    double fiber_clearance = 0.0;  // min |pi1 - pi1(max)| outside the ball, minus tube
    double regularity = 0.0;
    bool fiber_clean = false;
    const BoundarySample* witness = nullptr;
};

// Shared unique-max marking candidate evaluation: locate the Re(pi1) maximum over the
// transformed boundary samples, then measure its gap and fiber cleanliness.
MaxSearch assess_max(const HoloMap& map, std::span<const Vec2c> surface,
                     const std::vector<BoundarySample>& bd, double tube) {
    MaxSearch out;
    std::vector<Vec2c> tb(bd.size());
    for (std::size_t i = 0; i < bd.size(); ++i) {
        tb[i] = map.eval(bd[i].point);
        if (tb[i].z.real() > out.best) {
            out.best = tb[i].z.real();
            out.arg = i;
        }
    }
    const Vec2c top = tb[out.arg];
    const Vec2c top_tangent = map.eval(bd[out.arg].point + bd[out.arg].tangent) - top;
    const double tnorm = norm2(top_tangent) + 1e-300;
    out.regularity = std::abs(top_tangent.z) / tnorm;
    const double exclusion =
        std::min(2.0 * tube / std::max(out.regularity, 1e-3), 40.0 * tube);

    double second = -1e300;
    double clearance = 1e300;
    const BoundarySample* second_witness = nullptr;
    for (std::size_t i = 0; i < bd.size(); ++i) {
        if (dist2(tb[i], top) <= exclusion) continue;
        if (tb[i].z.real() > second) {
            second = tb[i].z.real();
            second_witness = &bd[i];
        }
        clearance = std::min(clearance, std::abs(tb[i].z - top.z));
    }
    for (const Vec2c& x : surface) {
        const Vec2c y = map.eval(x);
        if (dist2(y, top) <= exclusion) continue;
        clearance = std::min(clearance, std::abs(y.z - top.z));
        if (y.z.real() > second) second = y.z.real();
    }
    out.gap = out.best - second;
    out.fiber_clearance = clearance - tube;
    out.fiber_clean = out.fiber_clearance > 0.0;
    out.witness = second_witness;
    return out;
}

}  // namespace

NormalizationResult normalize_tangents(std::span<const ParamCurve> boundaries,
                                    const TangentOptions& opts) {
    if (boundaries.empty()) throw std::invalid_argument("normalize_tangents: no boundary curves");
    const auto samples = sweep_boundaries(boundaries, opts.samples);

    struct TangentMargins {
        double mz = 1e300, mw = 1e300;
        std::size_t worst_boundary = 0;
        double worst_t = 0.0;
    };
    auto margins = [&](cplx c1, cplx c2, const std::vector<BoundarySample>& sweep) {
        TangentMargins m;
        for (const auto& s : sweep) {
            const cplx tz = s.tangent.z + c1 * s.tangent.w;
            const cplx tw = s.tangent.w + c2 * s.tangent.z;
            const double norm = std::hypot(std::abs(tz), std::abs(tw)) + 1e-300;
            const double a = std::abs(tz) / norm, b = std::abs(tw) / norm;
            if (std::min(a, b) < std::min(m.mz, m.mw)) {
                m.worst_boundary = s.boundary;
                m.worst_t = s.t;
            }
            m.mz = std::min(m.mz, a);
            m.mw = std::min(m.mw, b);
        }
        return m;
    };

    Rng rng(opts.seed);
    TangentMargins last{};
    for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
        const cplx c1 = attempt == 0 ? cplx(0.0) : rng.disc(opts.draw_radius);
        const cplx c2 = attempt == 0 ? cplx(0.0) : rng.disc(opts.draw_radius);
        const TangentMargins coarse = margins(c1, c2, samples);
        last = coarse;
        if (std::min(coarse.mz, coarse.mw) <= opts.threshold) continue;

        // dense re-verification before acceptance
        const auto dense =
            sweep_boundaries(boundaries, opts.samples * std::size_t(opts.verify_factor));
        const TangentMargins fine = margins(c1, c2, dense);
        const double dz = fine.mz, dw = fine.mw;
        if (std::min(dz, dw) <= 0.5 * opts.threshold) {
            last = fine;
            continue;
        }

        NormalizationResult out;
        out.applied = HoloMap::linear_cross(c1, c2);
        out.tangent_clearance = std::min(dz, dw);
        out.report.add_pass("tangents.z_component", dz, dense.size());
        out.report.add_pass("tangents.w_component", dw, dense.size());
        std::ostringstream note;
        note << "accepted draw " << attempt << " (c1, c2 within " << opts.draw_radius
             << " of 0)";
        out.report.add_pass("tangents.identity_distance",
                            0.1 - std::max(std::abs(c1), std::abs(c2)), 1, note.str());
        return out;
    }
    std::ostringstream os;
    os << "normalize_tangents: " << opts.max_retries
       << " draws exhausted; minimal tangent witness at boundary " << last.worst_boundary
       << ", t = " << last.worst_t;
    throw SearchExhaustedError(os.str());
}

NormalizationResult mark_unique_max(std::span<const Vec2c> surface,
                                    std::span<const ParamCurve> boundaries,
                                    const MarkMaxOptions& opts) {
    if (boundaries.empty()) throw std::invalid_argument("mark_unique_max: no boundary curves");
    const auto samples = sweep_boundaries(boundaries, opts.boundary_samples);
    const double diam = cloud_diameter(surface, samples);
    const double tube = opts.tube_rel * diam;

    double re_lo = 1e300, re_hi = -1e300;
    for (const auto& s : samples) {
        re_lo = std::min(re_lo, s.point.z.real());
        re_hi = std::max(re_hi, s.point.z.real());
    }
    const double gap_floor = opts.min_gap_rel * (re_hi - re_lo + 1e-300);

    std::vector<std::pair<double, double>> candidates;
    candidates.push_back({0.0, 0.0});
    for (int j = 0; j <= opts.theta_steps; ++j) {
        const double theta = opts.theta0 * std::pow(2.0, -double(j));
        for (double phase : {0.0, 1.5707963267948966, 3.141592653589793, 4.71238898038469})
            candidates.push_back({theta, phase});
    }

    std::string why = "no candidate assessed";
    for (const auto& [theta, phase] : candidates) {
        const HoloMap rot = theta == 0.0 ? HoloMap::identity() : axis_rotation(theta, phase);
        MaxSearch coarse = assess_max(rot, surface, samples, tube);
        if (coarse.gap <= gap_floor) {
            why = "max not unique at sample scale";
            continue;
        }
        if (!coarse.fiber_clean) {
            why = "fiber tube not clean";
            continue;
        }
        if (coarse.regularity < opts.min_regularity) {
            why = "projection irregular at the maximizer";
            continue;
        }

        // dense re-verification at verify_factor times the sweep density
        const auto dense = sweep_boundaries(
            boundaries, opts.boundary_samples * std::size_t(opts.verify_factor));
        MaxSearch fine = assess_max(rot, surface, dense, tube);
        if (fine.gap <= 0.0 || !fine.fiber_clean || fine.regularity < opts.min_regularity) {
            why = "dense re-verification lost the margin";
            continue;
        }

        NormalizationResult out;
        out.applied = rot;
        MarkedPoint mp;
        mp.point = rot.eval(dense[fine.arg].point);
        mp.boundary_index = dense[fine.arg].boundary;
        mp.t = dense[fine.arg].t;
        out.marked.push_back(mp);
        out.max_gap = fine.gap;
        out.fiber_clearance = fine.fiber_clearance;
        out.tangent_clearance = fine.regularity;
        out.report.add_pass("maxpoint.unique_max_gap", fine.gap, dense.size());
        out.report.add_pass("maxpoint.fiber_clearance", fine.fiber_clearance,
                            dense.size() + surface.size());
        out.report.add_pass("maxpoint.regularity", fine.regularity - opts.min_regularity,
                            dense.size());
        // maximum-principle certificate: |e^z| attains its boundary max only
        // at the marked point (normalized to dodge overflow)
        out.report.add_pass("maxpoint.exp_certificate", 1.0 - std::exp(-fine.gap), dense.size(),
                            "max |e^z| attained only at the marked point");
        if (theta > 0.0) {
            std::ostringstream note;
            note << "rotation theta = " << theta << ", phase = " << phase;
            out.report.add_pass("maxpoint.rotation_near_identity", 0.1 - theta, 1, note.str());
        }
        return out;
    }
    throw SearchExhaustedError("mark_unique_max: theta search exhausted (" + why + ")");
}

TwistResult twist_to_second_boundary(std::span<const Vec2c> surface, const ParamCurve& bd1,
                                     const ParamCurve& bd2, const TwistOptions& opts) {
    const std::size_t n = opts.boundary_samples;
    std::vector<Vec2c> s1, s2;
    s1.reserve(n);
    s2.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u1 = bd1.t0 + (bd1.t1 - bd1.t0) * double(i) / double(n);
        const double u2 = bd2.t0 + (bd2.t1 - bd2.t0) * double(i) / double(n);
        s1.push_back(bd1.at(u1));
        s2.push_back(bd2.at(u2));
    }

    cplx zeta_star = 0.0;
    for (const Vec2c& x : s2)
        if (std::abs(x.z * x.w) > std::abs(zeta_star)) zeta_star = x.z * x.w;
    if (std::abs(zeta_star) == 0.0)
        throw SearchExhaustedError("twist_to_second_boundary: zw vanishes on bd D2 samples");
    const cplx phase = std::conj(zeta_star * zeta_star) / std::norm(zeta_star * zeta_star);

    auto value = [](cplx c, const Vec2c& x) {
        const double e = (c * (x.z * x.w) * (x.z * x.w)).real();
        if (e > 600.0) return std::numeric_limits<double>::infinity();
        return std::abs(x.z) * std::exp(e);
    };

    std::string why = "no amplitude tried";
    for (int j = -1; j <= opts.amplitude_steps; ++j) {
        const cplx c = j < 0 ? cplx(0.0) : std::pow(2.0, double(j - 8)) * phase;
        double m1 = 0.0, m2 = 0.0;
        bool overflow = false;
        for (const Vec2c& x : s1) {
            const double v = value(c, x);
            if (std::isinf(v)) overflow = true;
            m1 = std::max(m1, v);
        }
        for (const Vec2c& x : s2) {
            const double v = value(c, x);
            if (std::isinf(v)) overflow = true;
            m2 = std::max(m2, v);
        }
        if (overflow) {
            why = "twist amplitude overflowed";
            break;
        }
        if (m2 <= opts.min_ratio * m1) {
            why = "bd2 never dominated";
            continue;
        }

        const HoloMap twist = HoloMap::twist({c});

        // dense recheck of the domination gap
        double d1 = 0.0, d2 = 0.0;
        const std::size_t dn = n * 10;
        for (std::size_t i = 0; i < dn; ++i) {
            const double u1 = bd1.t0 + (bd1.t1 - bd1.t0) * double(i) / double(dn);
            const double u2 = bd2.t0 + (bd2.t1 - bd2.t0) * double(i) / double(dn);
            d1 = std::max(d1, value(c, bd1.at(u1)));
            d2 = std::max(d2, value(c, bd2.at(u2)));
        }
        if (d2 <= d1) {
            why = "dense recheck lost the domination";
            continue;
        }

        // phase-align the z axis so the dominating value sits on the real axis
        cplx top = 0.0;
        for (const Vec2c& x : s2) {
            const Vec2c y = twist.eval(x);
            if (std::abs(y.z) > std::abs(top)) top = y.z;
        }
        const HoloMap align =
            HoloMap::contraction(std::conj(top) / std::abs(top), 1.0);

        const HoloMap stage = twist.then(align);
        std::vector<Vec2c> twisted_surface;
        twisted_surface.reserve(surface.size());
        for (const Vec2c& x : surface) twisted_surface.push_back(stage.eval(x));
        const ParamCurve tb1 = bd1.mapped([stage](const Vec2c& x) { return stage.eval(x); });
        const ParamCurve tb2 = bd2.mapped([stage](const Vec2c& x) { return stage.eval(x); });
        const ParamCurve curves[2] = {tb1, tb2};

        NormalizationResult mark;
        try {
            mark = mark_unique_max(twisted_surface, std::span<const ParamCurve>(curves, 2),
                                   opts.mark);
        } catch (const SearchExhaustedError&) {
            why = "unique-max marking failed on the twisted surface";
            continue;
        }
        if (mark.marked.at(0).boundary_index != 1) {
            why = "marked point landed on bd D1";
            continue;
        }

        TwistResult out;
        out.twist = twist;
        out.align = align;
        out.second_mark = mark;
        out.report.add_pass("twist.max_on_bd2", d2 - d1, 2 * dn);
        // the twist fixes the coordinate axes pointwise
        const Vec2c axis_probe = twist.eval({cplx(0.0, 0.0), cplx(0.7, -0.2)});
        if (axis_probe.z == cplx(0.0, 0.0) && axis_probe.w == cplx(0.7, -0.2))
            out.report.add_pass("twist.fixes_axes", 0.0, 1);
        else
            out.report.add_fail("twist.fixes_axes", -norm2(axis_probe), 1, axis_probe);
        out.report.merge(mark.report, "bd2");
        return out;
    }
    throw SearchExhaustedError("twist_to_second_boundary: amplitude search exhausted (" + why +
                               ")");
}

VerificationReport verify_fiber_hypotheses(std::span<const Vec2c> surface,
                                                  std::span<const ParamCurve> boundaries,
                                                  std::span<const MarkedPoint> marked,
                                                  const HypothesesOptions& opts) {
    VerificationReport report;
    if (marked.empty()) {
        report.add_fail("hypotheses.marked_points", 0.0, 0, Vec2c{},
                        "no marked points supplied");
        return report;
    }
    const auto bd = sweep_boundaries(boundaries, opts.boundary_samples);
    const double diam = cloud_diameter(surface, bd);
    const double tube = opts.tube_rel * diam;

    for (std::size_t i = 0; i < marked.size(); ++i) {
        const MarkedPoint& mp = marked[i];
        const ParamCurve& curve = boundaries[mp.boundary_index];
        const Vec2c tangent = curve.tangent(mp.t);
        const double regularity = std::abs(tangent.z) / (norm2(tangent) + 1e-300);
        const double exclusion =
            std::min(2.0 * tube / std::max(regularity, 1e-3), 40.0 * tube);
        const std::string tag = "p" + std::to_string(i + 1);

        double clearance = 1e300;
        bool clean = true;
        Vec2c witness{};
        auto check_point = [&](const Vec2c& x) {
            if (dist2(x, mp.point) <= exclusion) return;
            const double d = std::abs(x.z - mp.point.z);
            if (d < clearance) {
                clearance = d;
                witness = x;
            }
            if (d < tube) clean = false;
        };
        for (const Vec2c& x : surface) check_point(x);
        for (const auto& s : bd) check_point(s.point);

        if (clean)
            report.add_pass("hypotheses." + tag + ".fiber", clearance - tube,
                            surface.size() + bd.size());
        else
            report.add_fail("hypotheses." + tag + ".fiber", clearance - tube,
                            surface.size() + bd.size(), witness);

        if (regularity >= opts.min_regularity)
            report.add_pass("hypotheses." + tag + ".regular", regularity - opts.min_regularity,
                            1);
        else
            report.add_fail("hypotheses." + tag + ".regular", regularity - opts.min_regularity,
                            1, mp.point);
    }
    return report;
}

}  // namespace holoembed
