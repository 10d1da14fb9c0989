#include "holoembed/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "holoembed/errors.hpp"

namespace holoembed {

namespace {

bool inside_removed(const Lattice& lat, const RemovedRegion& r, cplx z) {
    if (const auto* d = std::get_if<TorusDisc>(&r))
        return lat.torus_dist(z, d->center) < d->radius;
    return lat.torus_dist(z, std::get<TorusPuncture>(r).at) < 1e-9;
}

void require_in_removed(const TorusSurface& surface, cplx z, const char* who) {
    for (const auto& r : surface.removed())
        if (inside_removed(surface.lattice(), r, z)) return;
    throw std::invalid_argument(std::string(who) +
                                " must lie in a removed region of the surface");
}

std::array<cplx, 4> translated_half_periods(const Lattice& lat, cplx base) {
    const auto rams = ramification_points(lat);
    return {lat.reduce(base + rams[0].rep()), lat.reduce(base + rams[1].rep()),
            lat.reduce(base + rams[2].rep()), lat.reduce(base + rams[3].rep())};
}

void require_disjoint_ramification(const Lattice& lat, const std::array<cplx, 4>& a,
                                   const std::array<cplx, 4>& b) {
    for (cplx u : a)
        for (cplx v : b)
            if (lat.is_lattice_point(u - v, 1e-9))
                throw std::logic_error("embedding components share a ramification point");
}

}  // namespace

Vec2c EmbeddingMap::eval(cplx z) const {
    const Lattice& lat = wp_->lattice();
    const cplx first = wp_->eval(z - p_);
    if (kind_ == EmbeddingKind::generic) return {first, wp_->eval(z - q_)};

    // 1/(g_x0 - alpha): expand through the Laurent head near x0, where g_x0
    // itself blows up but the composite is holomorphic (value -> 0).
    const cplx u = lat.reduce(z - x0_);
    if (std::abs(u) < 0.1 * lat.systole()) {
        const cplx u2 = u * u;
        return {first, u2 / (1.0 + u2 * (wp_->tail_eval(u) - alpha_))};
    }
    return {first, 1.0 / (wp_->eval(u) - alpha_)};
}

ParamCurve EmbeddingMap::image_of(const CircleCurve& circle) const {
    ParamCurve out;
    out.f = [self = *this, circle](double t) { return self.eval(circle.at(t)); };
    out.t0 = 0.0;
    out.t1 = 1.0;
    out.closed = true;
    return out;
}

std::array<cplx, 4> EmbeddingMap::first_ramification() const {
    return translated_half_periods(wp_->lattice(), p_);
}

std::array<cplx, 4> EmbeddingMap::second_ramification() const {
    return translated_half_periods(wp_->lattice(),
                                   kind_ == EmbeddingKind::generic ? q_ : x0_);
}

std::string EmbeddingMap::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = kind_ == EmbeddingKind::generic ? "generic" : "degenerate";
    j["p"] = {p_.real(), p_.imag()};
    j["q"] = {q_.real(), q_.imag()};
    j["x0"] = {x0_.real(), x0_.imag()};
    j["alpha"] = {alpha_.real(), alpha_.imag()};
    return j.dump();
}

EmbeddingMap EmbeddingMap::from_json(const WeierstrassP& wp, const std::string& text) {
    const auto j = nlohmann::ordered_json::parse(text);
    auto c = [&](const char* key) {
        return cplx(j.at(key).at(0).get<double>(), j.at(key).at(1).get<double>());
    };
    EmbeddingMap m;
    m.kind_ = j.at("kind").get<std::string>() == "generic" ? EmbeddingKind::generic
                                                           : EmbeddingKind::degenerate;
    m.p_ = c("p");
    m.q_ = c("q");
    m.x0_ = c("x0");
    m.alpha_ = c("alpha");
    m.wp_ = &wp;
    return m;
}

EmbeddingMap build_embedding(const WeierstrassP& wp, const TorusSurface& surface, cplx p,
                             cplx q) {
    const Lattice& lat = surface.lattice();
    require_in_removed(surface, p, "build_embedding: p");
    require_in_removed(surface, q, "build_embedding: q");
    if (lat.is_lattice_point(p - q, 1e-12))
        throw std::invalid_argument("build_embedding: p and q coincide on the torus");
    if (lat.is_lattice_point(2.0 * (p - q), 1e-9))
        throw DegeneratePairError(
            "build_embedding: 2(p-q) lies in the lattice; use build_embedding_degenerate");

    EmbeddingMap m;
    m.kind_ = EmbeddingKind::generic;
    m.p_ = lat.reduce(p);
    m.q_ = lat.reduce(q);
    m.x0_ = 0.0;
    m.alpha_ = 0.0;
    m.wp_ = &wp;
    require_disjoint_ramification(lat, m.first_ramification(), m.second_ramification());
    return m;
}

EmbeddingMap build_embedding_degenerate(const WeierstrassP& wp, const TorusSurface& surface,
                                        cplx p, cplx q) {
    const Lattice& lat = surface.lattice();
    require_in_removed(surface, p, "build_embedding_degenerate: p");
    require_in_removed(surface, q, "build_embedding_degenerate: q");
    if (lat.is_lattice_point(p - q, 1e-12))
        throw std::invalid_argument("build_embedding_degenerate: p and q coincide on the torus");
    if (!lat.is_lattice_point(2.0 * (p - q), 1e-9))
        throw std::invalid_argument(
            "build_embedding_degenerate: 2(p-q) is not in the lattice; use build_embedding");

    EmbeddingMap m;
    m.kind_ = EmbeddingKind::degenerate;
    m.p_ = lat.reduce(p);
    m.q_ = lat.reduce(q);
    m.x0_ = lat.reduce(p + 0.5 * (q - p));
    m.alpha_ = wp.eval(m.p_ - m.x0_);
    m.wp_ = &wp;
    if (lat.is_lattice_point(2.0 * (m.x0_ - m.p_), 1e-9))
        throw std::logic_error("build_embedding_degenerate: 2(x0-p) landed in the lattice");
    require_disjoint_ramification(lat, m.first_ramification(), m.second_ramification());
    return m;
}

VerificationReport verify_injectivity(const EmbeddingMap& psi, const SampleGrid& grid,
                                      const InjectivityOptions& opts) {
    VerificationReport report;
    const std::size_t n = grid.points.size();
    if (n < 2) {
        report.add_pass("injectivity.image_separation", 0.0, n, "fewer than 2 grid points");
        return report;
    }
    std::vector<Vec2c> images;
    images.reserve(n);
    for (cplx z : grid.points) images.push_back(psi.eval(z));

    const ClosestPair worst = min_pairwise_distance(images);
    const double domain_sep =
        psi.wp().lattice().torus_dist(grid.points[worst.i], grid.points[worst.j]);
    std::ostringstream note;
    note << "worst pair: grid indices " << worst.i << ", " << worst.j
         << "; domain separation " << domain_sep << "; ratio "
         << (domain_sep > 0.0 ? worst.dist / domain_sep : 0.0);
    if (worst.dist >= opts.min_separation)
        report.add_pass("injectivity.image_separation", worst.dist, n, note.str());
    else
        report.add_fail("injectivity.image_separation", worst.dist - opts.min_separation, n,
                        images[worst.i], note.str());
    return report;
}

PqChoice choose_pq_for_discs(const WeierstrassP& wp, const TorusSurface& surface,
                             const PqOptions& opts) {
    if (surface.removed().size() != 2 || !surface.boundary(0) || !surface.boundary(1))
        throw std::invalid_argument("choose_pq_for_discs: surface must remove two discs");
    const Lattice& lat = surface.lattice();
    const CircleCurve bd1 = *surface.boundary(0);
    const CircleCurve bd2 = *surface.boundary(1);
    const std::size_t nb = opts.boundary_samples;

    auto sweep_max = [&](const CircleCurve& c, cplx center) {
        double best = 0.0;
        for (std::size_t i = 0; i < nb; ++i) {
            const double v = std::abs(wp.eval(c.at(double(i) / double(nb)) - center));
            best = std::max(best, v);
        }
        return best;
    };

    double approach = opts.approach_angle;
    for (int restart = 0; restart < 8; ++restart) {
        const cplx u = std::polar(1.0, approach);

        // p wanders toward bd D1 until its sup there dominates bd D2.
        cplx p;
        double norm1 = 0.0, norm2 = 0.0;
        double d = bd1.radius / 2.0;
        bool found_p = false;
        for (int step = 0; step < opts.max_halvings; ++step) {
            if (d < 10.0 * wp.pole_margin()) break;
            p = bd1.center + (bd1.radius - d) * u;
            norm1 = sweep_max(bd1, p);
            norm2 = sweep_max(bd2, p);
            if (norm1 > opts.norm_gap_factor * norm2) {
                found_p = true;
                break;
            }
            d /= 2.0;
        }
        if (!found_p)
            throw SearchExhaustedError(
                "choose_pq_for_discs: ||f_p|| on bd D1 never dominated bd D2");

        // x0 on bd D2 with the largest |f_p| (in particular nonzero).
        cplx x0;
        double fp_x0 = 0.0;
        for (std::size_t i = 0; i < nb; ++i) {
            const cplx x = bd2.at(double(i) / double(nb));
            const double v = std::abs(wp.eval(x - p));
            if (v > fp_x0) {
                fp_x0 = v;
                x0 = x;
            }
        }
        if (fp_x0 == 0.0)
            throw SearchExhaustedError("choose_pq_for_discs: f_p vanished on all of bd D2");

        const double bound_m = 1.1 * sweep_max(bd1, x0);

        // q approaches x0 until |g_q| stays below M on bd D1 while the
        // product at x0 exceeds M N.
        const cplx inward = (bd2.center - x0) / std::abs(bd2.center - x0);
        cplx q;
        double gq_x0 = 0.0;
        double dq = bd2.radius / 4.0;
        bool found_q = false;
        for (int step = 0; step < opts.max_halvings; ++step) {
            if (dq < 10.0 * wp.pole_margin()) break;
            q = x0 + dq * inward;
            const double g_on_bd1 = sweep_max(bd1, q);
            gq_x0 = std::abs(wp.eval(x0 - q));
            if (g_on_bd1 < bound_m &&
                gq_x0 * fp_x0 > opts.product_gap_factor * bound_m * norm1) {
                found_q = true;
                break;
            }
            dq /= 2.0;
        }
        if (!found_q)
            throw SearchExhaustedError(
                "choose_pq_for_discs: |g_q(x0) f_p(x0)| > M N unreachable before the pole margin");

        // the pair must admit the generic embedding
        if (lat.is_lattice_point(2.0 * (p - q), 1e-7)) {
            approach += 0.17;
            continue;
        }

        PqChoice out;
        out.p = lat.reduce(p);
        out.q = lat.reduce(q);
        out.x0 = lat.reduce(x0);
        out.norm_on_bd1 = norm1;
        out.g_bound = bound_m;
        out.product_at_x0 = gq_x0 * fp_x0;

        // conclusion: |f_p g_q| takes its maximum on bd D2
        double prod1 = 0.0, prod2 = 0.0;
        double g_max_bd1 = 0.0;
        for (std::size_t i = 0; i < nb; ++i) {
            const double t = double(i) / double(nb);
            const cplx z1 = bd1.at(t), z2 = bd2.at(t);
            prod1 = std::max(prod1, std::abs(wp.eval(z1 - p)) * std::abs(wp.eval(z1 - q)));
            prod2 = std::max(prod2, std::abs(wp.eval(z2 - p)) * std::abs(wp.eval(z2 - q)));
            g_max_bd1 = std::max(g_max_bd1, std::abs(wp.eval(z1 - q)));
        }
        out.max_product_margin = prod2 - prod1;

        if (prod2 > prod1)
            out.report.add_pass("pq.product_max_on_bd2", prod2 - prod1, nb);
        else
            out.report.add_fail("pq.product_max_on_bd2", prod2 - prod1, nb,
                                Vec2c{out.x0, 0.0});
        if (g_max_bd1 < bound_m)
            out.report.add_pass("pq.g_bounded_on_bd1", bound_m - g_max_bd1, nb);
        else
            out.report.add_fail("pq.g_bounded_on_bd1", bound_m - g_max_bd1, nb,
                                Vec2c{out.q, 0.0});
        out.report.add_pass("pq.norm_gap", norm1 - opts.norm_gap_factor * norm2, nb);
        out.report.add_pass("pq.product_inequality",
                            out.product_at_x0 - out.g_bound * out.norm_on_bd1, nb);
        return out;
    }
    throw SearchExhaustedError(
        "choose_pq_for_discs: no approach angle yielded a non-degenerate pair");
}

PunctureChoice puncture_max_locator(const WeierstrassP& wp, const TorusSurface& surface,
                                    const PunctureOptions& opts) {
    if (surface.removed().size() != 2 || !surface.boundary(0) || surface.boundary(1))
        throw std::invalid_argument(
            "puncture_max_locator: surface must remove one disc (index 0) and one point");
    const Lattice& lat = surface.lattice();
    const CircleCurve bd = *surface.boundary(0);
    const cplx q = region_center(surface.removed()[1]);
    const std::size_t nb = opts.boundary_samples;

    const double r0 = opts.r0 > 0.0 ? opts.r0 : 0.4 * lat.systole();
    const LaurentTail tail = bound_tail(wp, r0);
    const int k = star_condition_k(wp, tail);

    // Normalization point: the boundary point where Im is minimal, with
    // outward normal -i. Circles give it in closed form.
    const cplx z0 = bd.center - cplx(0.0, bd.radius);

    PunctureChoice out;
    out.k = k;

    // precompute the boundary once
    std::vector<cplx> boundary(nb);
    for (std::size_t i = 0; i < nb; ++i) boundary[i] = bd.at(double(i) / double(nb));

    double r = r0;
    bool accepted = false;
    double slope_margin = 0.0, cap_margin = 0.0, half_margin = 0.0, star_margin = 0.0;
    double quad_c = 0.0;
    std::string failing = "slope";
    for (int step = 0; step < opts.max_r_halvings; ++step, r /= 2.0) {
        const double delta = r / double(k);
        if (delta < 2.0 * wp.pole_margin()) {
            failing = "delta hit the pole margin";
            break;
        }
        const cplx p_delta = z0 + cplx(0.0, delta);
        if (lat.is_lattice_point(2.0 * (p_delta - q), 1e-7)) {
            failing = "pair degenerate at this delta";
            continue;
        }

        // (a) graph slope s'(x) < 1/(2k) on the window |x| < r, by finite
        // differences over the sampled boundary near z0
        std::vector<std::pair<double, double>> graph;  // (x, s(x))
        for (cplx b : boundary) {
            const cplx rel = b - z0;
            if (std::abs(rel.real()) < r && rel.imag() < bd.radius)
                graph.push_back({rel.real(), rel.imag()});
        }
        std::sort(graph.begin(), graph.end());
        if (graph.size() < 5) {
            failing = "too few boundary samples in the slope window";
            continue;
        }
        double max_slope = 0.0;
        for (std::size_t i = 1; i + 1 < graph.size(); ++i) {
            const double dx = graph[i + 1].first - graph[i - 1].first;
            if (dx <= 0.0) continue;
            max_slope = std::max(max_slope,
                                 std::abs((graph[i + 1].second - graph[i - 1].second) / dx));
        }
        slope_margin = 1.0 / (2.0 * double(k)) - max_slope;
        if (slope_margin <= 0.0) {
            failing = "slope";
            continue;
        }

        // (b) boundary cap inside U_r = {|u| < r, Im u <= -r/(2k)}
        std::size_t cap_count = 0;
        cap_margin = 1e300;
        for (cplx b : boundary) {
            const cplx u = b - p_delta;
            if (std::abs(u) < r) {
                ++cap_count;
                cap_margin = std::min(cap_margin, -r / (2.0 * double(k)) - u.imag());
            }
        }
        if (cap_count == 0 || cap_margin <= 0.0) {
            failing = "boundary cap not inside U_r";
            continue;
        }

        // (c) phi(U_r) in the lower half-plane, phi = u / sqrt(1 + u^2 f(u))
        half_margin = 1e300;
        quad_c = 0.0;
        bool lower_ok = true;
        const int gx = 25, gy = 12;
        for (int a = 0; a < gx && lower_ok; ++a)
            for (int b = 0; b < gy; ++b) {
                const double x = -r + 2.0 * r * (double(a) + 0.5) / gx;
                const double y =
                    -r + (r - r / (2.0 * double(k))) * (double(b) + 0.5) / gy;
                const cplx u(x, y);
                if (std::abs(u) >= r || u.imag() > -r / (2.0 * double(k))) continue;
                const cplx g = 1.0 + u * u * wp.tail_eval(u);
                const cplx phi = u / std::sqrt(g);
                half_margin = std::min(half_margin, -phi.imag());
                quad_c = std::max(quad_c, std::abs(phi - u) / std::norm(u));
                if (phi.imag() >= 0.0) lower_ok = false;
            }
        if (!lower_ok) {
            failing = "phi left the lower half-plane";
            continue;
        }

        // (*) the inner-disc floor beats every boundary sample outside the r-disc
        const double floor_val = std::abs(wp.eval(cplx(0.0, -delta)));
        double outside_sup = 0.0;
        for (cplx b : boundary) {
            const cplx u = b - p_delta;
            if (std::abs(u) >= r)
                outside_sup = std::max(outside_sup, std::abs(wp.eval(u)));
        }
        star_margin = floor_val - outside_sup;
        if (star_margin <= 0.0) {
            failing = "star gap";
            continue;
        }

        out.r = r;
        out.delta = delta;
        out.p_delta = lat.reduce(p_delta);
        accepted = true;
        break;
    }
    if (!accepted)
        throw SearchExhaustedError("puncture_max_locator: r-search exhausted (" + failing + ")");

    // locate the sampled maximizer of |f_p_delta| on bd D1 and certify it
    double best = -1.0, second = -1.0;
    cplx x_star;
    std::vector<double> fvals(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        fvals[i] = std::abs(wp.eval(boundary[i] - out.p_delta));
        if (fvals[i] > best) {
            best = fvals[i];
            x_star = boundary[i];
        }
    }
    const double exclusion = opts.exclusion_arc > 0.0 ? opts.exclusion_arc : 2.0 * out.delta;
    double value_gap = 1e300;
    const cplx f_star = wp.eval(x_star - out.p_delta);
    for (std::size_t i = 0; i < nb; ++i) {
        if (std::abs(boundary[i] - x_star) <= exclusion) continue;
        second = std::max(second, fvals[i]);
        value_gap = std::min(value_gap,
                             std::abs(wp.eval(boundary[i] - out.p_delta) - f_star));
    }
    out.x_star = x_star;
    out.max_gap = best - second;

    out.report.add_pass("puncture.slope", slope_margin, nb);
    out.report.add_pass("puncture.cap_in_Ur", cap_margin, nb);
    out.report.add_pass("puncture.phi_lower_halfplane", half_margin, 300);
    out.report.add_pass("puncture.phi_quadratic_bound", quad_c, 300,
                        "max |phi(u)-u|/|u|^2 over U_r samples");
    out.report.add_pass("puncture.star_gap", star_margin, nb);
    if (out.max_gap > 0.0)
        out.report.add_pass("puncture.unique_max", out.max_gap / best, nb);
    else
        out.report.add_fail("puncture.unique_max", out.max_gap / best, nb, Vec2c{x_star, 0.0});
    if (value_gap > 0.0)
        out.report.add_pass("puncture.value_preimage_gap", value_gap, nb);
    else
        out.report.add_fail("puncture.value_preimage_gap", value_gap, nb, Vec2c{x_star, 0.0});
    return out;
}

}  // namespace holoembed
