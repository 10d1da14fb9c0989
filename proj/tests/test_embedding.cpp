#include "doctest.h"

#include <cmath>

#include "holoembed/embedding.hpp"
#include "holoembed/errors.hpp"
#include "holoembed/rng.hpp"

using namespace holoembed;

namespace {

const Lattice square(cplx(1.0, 0.0), cplx(0.0, 1.0));

TorusSurface two_point_surface(cplx p, cplx q) {
    return TorusSurface(square, {TorusPuncture{p}, TorusPuncture{q}});
}

const WeierstrassP& shared_wp() {
    static const WeierstrassP wp(square, 60);
    return wp;
}

}  // namespace

TEST_CASE("generic/degenerate dichotomy is total") {
    const WeierstrassP& wp = shared_wp();
    Rng rng(13);
    for (int i = 0; i < 40; ++i) {
        const cplx p = rng.box(0.45);
        cplx q = rng.box(0.45);
        if (square.is_lattice_point(p - q, 1e-6)) q += cplx(0.17, 0.05);
        const TorusSurface surf = two_point_surface(p, q);
        const bool generic_ok = [&] {
            try {
                build_embedding(wp, surf, p, q);
                return true;
            } catch (const DegeneratePairError&) {
                return false;
            }
        }();
        const bool degenerate_ok = [&] {
            try {
                build_embedding_degenerate(wp, surf, p, q);
                return true;
            } catch (const std::invalid_argument&) {
                return false;
            }
        }();
        CHECK(generic_ok != degenerate_ok);  // exactly one accepts
    }

    // forced examples from the construction
    const cplx p(0.1, 0.1);
    CHECK_NOTHROW(
        build_embedding(wp, two_point_surface(p, cplx(0.6, 0.35)), p, cplx(0.6, 0.35)));
    const cplx qh = p + 0.5 * square.omega1();
    CHECK_THROWS_AS(build_embedding(wp, two_point_surface(p, qh), p, qh), DegeneratePairError);
}

TEST_CASE("membership preconditions") {
    const WeierstrassP& wp = shared_wp();
    const TorusSurface surf(square, {TorusDisc{cplx(-0.25, -0.25), 0.15},
                                     TorusDisc{cplx(0.25, 0.25), 0.15}});
    CHECK_THROWS_AS(build_embedding(wp, surf, cplx(0.25, -0.25), cplx(0.25, 0.25)),
                    std::invalid_argument);
    CHECK_NOTHROW(build_embedding(wp, surf, cplx(-0.25, -0.2), cplx(0.25, 0.28)));
}

TEST_CASE("ramification sets of the two components are disjoint") {
    const WeierstrassP& wp = shared_wp();
    Rng rng(29);
    for (int i = 0; i < 20; ++i) {
        const cplx p = rng.box(0.4);
        cplx q = rng.box(0.4);
        if (square.is_lattice_point(2.0 * (p - q), 1e-4)) q += cplx(0.11, 0.07);
        const EmbeddingMap psi = build_embedding(wp, two_point_surface(p, q), p, q);
        for (cplx a : psi.first_ramification())
            for (cplx b : psi.second_ramification())
                CHECK_FALSE(square.is_lattice_point(a - b, 1e-8));
    }
}

TEST_CASE("degenerate repair: alpha matches at p and q, x0 shifted correctly") {
    const WeierstrassP& wp = shared_wp();
    const cplx p(0.12, -0.07);
    const cplx q = p + 0.5 * square.omega1();
    const TorusSurface surf = two_point_surface(p, q);
    const EmbeddingMap psi = build_embedding_degenerate(wp, surf, p, q);

    // g_x0(p) = g_x0(q) = alpha
    const cplx gp = wp.eval(p - psi.x0());
    const cplx gq = wp.eval(q - psi.x0());
    CHECK(std::abs(gp - psi.alpha()) <= 1e-8 * std::abs(psi.alpha()));
    CHECK(std::abs(gq - psi.alpha()) <= 1e-8 * std::abs(psi.alpha()));

    // 2(x0 - p) stays outside the lattice
    CHECK_FALSE(square.is_lattice_point(2.0 * (psi.x0() - p), 1e-6));

    // the repaired pair separates random point pairs
    Rng rng(41);
    int checked = 0;
    for (int i = 0; i < 400 && checked < 200; ++i) {
        const cplx a = rng.box(0.5), b = rng.box(0.5);
        auto clear = [&](cplx z) {
            return square.torus_dist(z, p) > 0.05 && square.torus_dist(z, q) > 0.05 &&
                   square.torus_dist(z, psi.x0()) > 0.05 && std::abs(square.reduce(z)) > 0.05;
        };
        if (!clear(a) || !clear(b) || square.torus_dist(a, b) < 1e-3) continue;
        ++checked;
        CHECK(dist2(psi.eval(a), psi.eval(b)) > 1e-9);
    }
    CHECK(checked == 200);

    // near x0 the repaired second component is regular and small
    const cplx near_x0 = psi.x0() + cplx(1e-5, -2e-5);
    CHECK(std::abs(psi.eval(near_x0).w) < 1e-8);
}

TEST_CASE("verify_injectivity: pass, trivial single point, and f_p-twin separation") {
    const WeierstrassP& wp = shared_wp();
    const cplx p(-0.22, -0.18), q(0.24, 0.31);
    const TorusSurface surf = two_point_surface(p, q);
    const EmbeddingMap psi = build_embedding(wp, surf, p, q);

    SampleGrid grid =
        sample_torus_minus(square, {TorusDisc{p, 0.05}, TorusDisc{q, 0.05}}, 0.05, 0.04);
    const auto report = verify_injectivity(psi, grid);
    CHECK(report.all_pass());

    SampleGrid single;
    single.points = {cplx(0.3, 0.3)};
    CHECK(verify_injectivity(psi, single).all_pass());

    // z and -z + 2p have identical f_p values; the second coordinate must
    // separate them
    const cplx z1(0.31, 0.11);
    const cplx z2 = square.reduce(-z1 + 2.0 * p);
    SampleGrid twins;
    twins.points = {z1, z2};
    CHECK(verify_injectivity(psi, twins).all_pass());
    CHECK(std::abs(psi.eval(z1).z - psi.eval(z2).z) < 1e-6 * std::abs(psi.eval(z1).z));
    CHECK(std::abs(psi.eval(z1).w - psi.eval(z2).w) > 1e-3);
}

TEST_CASE("choose_pq_for_discs: the displayed inequalities hold") {
    const WeierstrassP& wp = shared_wp();
    const TorusSurface surf(square, {TorusDisc{cplx(-0.25, -0.25), 0.15},
                                     TorusDisc{cplx(0.25, 0.25), 0.15}});
    PqOptions opts;
    opts.boundary_samples = 512;
    const PqChoice pq = choose_pq_for_discs(wp, surf, opts);
    CHECK(pq.report.all_pass());
    CHECK(pq.product_at_x0 > pq.g_bound * pq.norm_on_bd1);
    CHECK(pq.max_product_margin > 0.0);
    CHECK_FALSE(square.is_lattice_point(2.0 * (pq.p - pq.q), 1e-7));

    // the pole approach scales like d^-2 (Laurent leading term)
    const CircleCurve bd1 = *surf.boundary(0);
    const cplx u = std::polar(1.0, 0.3);
    double prev = 0.0;
    for (double d : {0.05, 0.025, 0.0125}) {
        const cplx pp = bd1.center + (bd1.radius - d) * u;
        double sup = 0.0;
        for (int i = 0; i < 512; ++i)
            sup = std::max(sup, std::abs(wp.eval(bd1.at(double(i) / 512.0) - pp)));
        if (prev > 0.0) CHECK(sup / prev == doctest::Approx(4.0).epsilon(0.25));
        prev = sup;
    }
}

TEST_CASE("puncture_max_locator: construction bounds at sample scale") {
    const WeierstrassP& wp = shared_wp();
    const TorusSurface surf(square, {TorusDisc{cplx(0.1, 0.25), 0.2},
                                     TorusPuncture{cplx(-0.25, -0.2)}});
    PunctureOptions opts;
    opts.boundary_samples = 2048;
    const PunctureChoice loc = puncture_max_locator(wp, surf, opts);
    CHECK(loc.report.all_pass());
    CHECK(loc.k >= 2);
    CHECK(loc.delta == doctest::Approx(loc.r / double(loc.k)));

    // p_delta sits above the bottom boundary point, inside the disc
    const cplx z0 = cplx(0.1, 0.25) - cplx(0.0, 0.2);
    CHECK(std::abs(loc.p_delta - (z0 + cplx(0.0, loc.delta))) < 1e-12);
    CHECK(square.torus_dist(loc.p_delta, cplx(0.1, 0.25)) < 0.2);

    // the located maximizer is the bottom point at sampled resolution
    CHECK(std::abs(loc.x_star - z0) < 0.01);
    CHECK(loc.max_gap > 0.0);

    // requires disc + point, in that order
    CHECK_THROWS_AS(puncture_max_locator(
                        wp, TorusSurface(square, {TorusDisc{cplx(0.1, 0.25), 0.2},
                                                  TorusDisc{cplx(-0.25, -0.25), 0.1}}),
                        opts),
                    std::invalid_argument);
}

TEST_CASE("phi = z/h stays quadratically close to z, uniformly in the radius") {
    // phi(z) = z / sqrt(1 + z^2 f(z)) with f the regular part of wp
    const WeierstrassP& wp = shared_wp();
    double c_bound = 0.0;
    bool first = true;
    for (const double r : {0.1, 0.05, 0.025, 0.0125}) {
        double c_r = 0.0;
        for (int i = 0; i < 64; ++i) {
            const cplx u = 0.9 * r * std::polar(1.0, 0.098 * double(i)) *
                           std::sqrt((double(i % 8) + 1.0) / 8.0);
            const cplx g = 1.0 + u * u * wp.tail_eval(u);
            const cplx phi = u / std::sqrt(g);
            c_r = std::max(c_r, std::abs(phi - u) / std::norm(u));
        }
        if (first) {
            c_bound = 2.0 * c_r;
            first = false;
        }
        CHECK(c_r <= c_bound);  // C does not grow as r decreases
    }
}

TEST_CASE("embedding parameters round-trip through JSON") {
    const WeierstrassP& wp = shared_wp();
    const cplx p(0.12, -0.07);
    const cplx q = p + 0.5 * square.omega1();
    const EmbeddingMap psi =
        build_embedding_degenerate(wp, two_point_surface(p, q), p, q);
    const EmbeddingMap back = EmbeddingMap::from_json(wp, psi.to_json());
    CHECK(back.kind() == psi.kind());
    CHECK(back.p() == psi.p());
    CHECK(back.x0() == psi.x0());
    CHECK(back.alpha() == psi.alpha());
    const cplx z(0.31, 0.22);
    CHECK(dist2(back.eval(z), psi.eval(z)) == 0.0);
}

TEST_CASE("image_of produces a resampleable boundary curve") {
    const WeierstrassP& wp = shared_wp();
    const cplx p(-0.22, -0.18), q(0.24, 0.31);
    const EmbeddingMap psi = build_embedding(wp, two_point_surface(p, q), p, q);
    const ParamCurve curve = psi.image_of(CircleCurve{p, 0.03});
    const BoundaryCurve sampled = curve.sample(256);
    CHECK(sampled.samples().size() == 256);
    CHECK(sampled.closed());
    CHECK(sampled.tangent_consistency() < 0.05);
    // the collar image hugs the double pole of f_p: |z| of order radius^-2
    for (const auto& s : sampled.samples()) CHECK(std::abs(s.point.z) > 100.0);
}
