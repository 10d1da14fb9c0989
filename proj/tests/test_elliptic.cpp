#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "holoembed/elliptic.hpp"
#include "holoembed/errors.hpp"
#include "holoembed/rng.hpp"

using namespace holoembed;

namespace {

const Lattice square(cplx(1.0, 0.0), cplx(0.0, 1.0));

cplx random_clear_point(Rng& rng, const Lattice& L, double clearance) {
    for (;;) {
        const double s = rng.uniform(-0.5, 0.5);
        const double t = rng.uniform(-0.5, 0.5);
        const cplx z = s * L.omega1() + t * L.omega2();
        bool clear = std::abs(L.reduce(z)) > clearance;
        for (const auto& p : ramification_points(L))
            if (L.torus_dist(z, p.rep()) < clearance) clear = false;
        if (clear) return z;
    }
}

// Independent oracle: winding of wp - w around the fundamental-domain
// boundary by dense phase tracking. Returns zeros minus poles.
int boundary_winding_oracle(const WeierstrassP& wp, cplx w) {
    const Lattice& L = wp.lattice();
    const double o = 0.023;  // keeps the pole and typical zeros off the seam
    auto at = [&](double s, double t) {
        return wp.eval_unguarded(s * L.omega1() + t * L.omega2()) - w;
    };
    const double corners[5][2] = {{-0.5 + o, -0.5 + o}, {0.5 + o, -0.5 + o},
                                  {0.5 + o, 0.5 + o},   {-0.5 + o, 0.5 + o},
                                  {-0.5 + o, -0.5 + o}};
    double total = 0.0;
    const int n = 4096;
    cplx prev = at(corners[0][0], corners[0][1]);
    for (int e = 0; e < 4; ++e)
        for (int i = 1; i <= n; ++i) {
            const double u = double(i) / n;
            const double s = corners[e][0] + u * (corners[e + 1][0] - corners[e][0]);
            const double t = corners[e][1] + u * (corners[e + 1][1] - corners[e][1]);
            const cplx f = at(s, t);
            total += std::arg(f / prev);
            prev = f;
        }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

}  // namespace

TEST_CASE("wp evenness and periodicity") {
    const WeierstrassP wp(square, 60);

    // when the translate is exact in floating point, reduction restores the
    // argument bit for bit
    const cplx zd(0.3125, 0.15625);
    const cplx a0 = wp.eval(zd), c0 = wp.eval(zd + square.omega1());
    CHECK(a0.real() == c0.real());
    CHECK(a0.imag() == c0.imag());

    Rng rng(101);
    for (int i = 0; i < 50; ++i) {
        const cplx z = random_clear_point(rng, square, 0.1);
        const cplx a = wp.eval(z), b = wp.eval(-z);
        CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));

        // generic translates lose at most the rounding of z + omega itself
        const cplx c = wp.eval(z + square.omega1());
        CHECK(std::abs(a - c) <= 1e-12 * std::abs(a));
    }
}

TEST_CASE("raw truncated series: measured truncation behavior") {
    const WeierstrassP wp60(square, 60);
    const WeierstrassP wp120 = wp60.with_truncation(120);
    const cplx z(0.2, 0.1);
    // raw periodicity error is the documented O(|z| N^-2) truncation scale
    const double raw_err = std::abs(wp60.eval_raw(z + square.omega1()) - wp60.eval_raw(z)) /
                           std::abs(wp60.eval_raw(z));
    CHECK(raw_err > 1e-9);   // genuinely truncated
    CHECK(raw_err < 1e-3);   // but quadratically small at N=60
    const double raw_err_120 =
        std::abs(wp120.eval_raw(z + square.omega1()) - wp120.eval_raw(z)) /
        std::abs(wp120.eval_raw(z));
    CHECK(raw_err_120 < raw_err);  // improves with N

    // tail-completed evaluations agree across N to the design threshold
    const cplx zt(0.31, 0.22);
    CHECK(std::abs(wp60.eval(zt) - wp120.eval(zt)) <= 1e-8 * std::abs(wp120.eval(zt)));
}

TEST_CASE("wp is real at half-periods of conjugation-symmetric lattices") {
    const Lattice big(cplx(2.0, 0.0), cplx(0.0, 2.0));
    const WeierstrassP wp(big, 60);
    const cplx v = wp.eval(cplx(1.0, 0.0));
    CHECK(std::abs(v.imag()) <= 1e-10 * std::abs(v.real()));
}

TEST_CASE("pole margin is an error, never a large number") {
    const WeierstrassP wp(square, 60);
    CHECK_THROWS_AS(wp.eval(cplx(1e-6, 0.0)), PoleProximityError);
    CHECK_THROWS_AS(wp.eval(square.omega1() + cplx(1e-6, 0.0)), PoleProximityError);
    CHECK_NOTHROW(wp.eval(cplx(0.3, 0.2)));
}

TEST_CASE("wp_deriv: oddness, half-period zeros, finite differences") {
    const WeierstrassP wp(square, 60);
    Rng rng(55);
    for (int i = 0; i < 30; ++i) {
        const cplx z = random_clear_point(rng, square, 0.1);
        const cplx d = wp.deriv(z);
        CHECK(std::abs(d + wp.deriv(-z)) <= 1e-10 * std::abs(d));

        // central differences of wp match wp' to O(h^2)
        const double h = 1e-5;
        const cplx fd = (wp.eval(z + h) - wp.eval(z - h)) / (2.0 * h);
        CHECK(std::abs(fd - d) <= 1e-7 * (1.0 + std::abs(d)));
    }

    // derivative vanishes at the four ramification points
    const double local_scale = std::abs(wp.deriv(cplx(0.25, 0.0)));
    for (const auto& p : ramification_points(square)) {
        if (std::abs(p.rep()) < 1e-12) continue;  // the pole itself
        CHECK(std::abs(wp.deriv(p.rep())) <= 1e-6 * local_scale);
    }
}

TEST_CASE("invariants: lattice symmetries and the differential equation") {
    const auto inv_sq = invariants(square, 60);
    CHECK(std::abs(inv_sq.g3) <= 1e-8 * std::abs(inv_sq.g2));
    CHECK(std::abs(inv_sq.discriminant()) > 0.0);

    const Lattice hex(cplx(1.0, 0.0), std::polar(1.0, std::numbers::pi / 3.0));
    const auto inv_hex = invariants(hex, 60);
    CHECK(std::abs(inv_hex.g2) <= 1e-8 * std::abs(inv_hex.g3));

    // raw truncated sums share the exact symmetry cancellations
    const auto raw_sq = invariants_raw(square, 40);
    CHECK(std::abs(raw_sq.g3) <= 1e-10 * std::abs(raw_sq.g2));

    // residual of (wp')^2 = 4 wp^3 - g2 wp - g3 at 100 random points
    const WeierstrassP wp(square, 60);
    Rng rng(2024);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const cplx z = random_clear_point(rng, square, 0.05);
        const cplx P = wp.eval(z), D = wp.deriv(z);
        const cplx res = D * D - (4.0 * P * P * P - inv_sq.g2 * P - inv_sq.g3);
        worst = std::max(worst, std::abs(res) / std::norm(D));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("wp_preimages: ramification points give a single double point") {
    const WeierstrassP wp(square, 60);
    for (const auto& p : ramification_points(square)) {
        if (std::abs(p.rep()) < 1e-12) continue;
        const cplx w = wp.eval(p.rep());
        const auto pre = wp_preimages(wp, w, 1e-9);
        REQUIRE(pre.size() == 1);
        CHECK(pre[0].multiplicity == 2);
        CHECK(pre[0].point.equivalent(p, 1e-5));
    }
}

TEST_CASE("wp_preimages: generic targets give the +/- pair") {
    const WeierstrassP wp(square, 60);
    Rng rng(77);
    for (int i = 0; i < 10; ++i) {
        const cplx z0 = random_clear_point(rng, square, 0.12);
        const cplx w = wp.eval(z0);
        const auto pre = wp_preimages(wp, w, 1e-9);
        REQUIRE(pre.size() == 2);
        CHECK(pre[0].multiplicity == 1);
        CHECK(pre[1].multiplicity == 1);
        const TorusPoint plus(z0, square), minus(-z0, square);
        const bool forward = pre[0].point.equivalent(plus, 1e-6) &&
                             pre[1].point.equivalent(minus, 1e-6);
        const bool backward = pre[0].point.equivalent(minus, 1e-6) &&
                              pre[1].point.equivalent(plus, 1e-6);
        CHECK((forward || backward));
    }
}

TEST_CASE("wp_preimages: multiplicities always total two; boundary oracle agrees") {
    const WeierstrassP wp(square, 60);
    Rng rng(31337);
    for (int i = 0; i < 100; ++i) {
        const cplx w = 8.0 * rng.box(1.0);
        const auto pre = wp_preimages(wp, w, 1e-9);
        int total = 0;
        for (const auto& p : pre) total += p.multiplicity;
        CHECK(total == 2);
        if (i % 10 == 0) {
            // independent count: boundary integral sees zeros - poles = 0
            CHECK(boundary_winding_oracle(wp, w) == 0);
        }
    }
}

TEST_CASE("bound_tail: Laurent scale and the two displayed inequalities") {
    const WeierstrassP wp(square, 60);
    const auto inv = invariants(square, 60);

    // M(r0)/r0^2 approaches |g2|/20 as r0 -> 0 (times the 1.1 safety factor)
    double prev_ratio = 0.0;
    for (const double r0 : {0.2, 0.1, 0.05}) {
        const auto tail = bound_tail(wp, r0);
        const double ratio = tail.M / (r0 * r0);
        CHECK(ratio < 1.6 * std::abs(inv.g2) / 20.0);
        prev_ratio = ratio;
    }
    CHECK(prev_ratio == doctest::Approx(1.1 * std::abs(inv.g2) / 20.0).epsilon(0.02));

    const auto tail = bound_tail(wp, 0.3);
    CHECK_THROWS_AS(bound_tail(wp, 0.55), std::invalid_argument);

    // |wp| <= 1/r^2 + M on |z| = r and |wp| >= k^2/r^2 - M on the k-shrunk disc
    const int k = star_condition_k(wp, tail);
    for (const double r : {0.3, 0.2, 0.1}) {
        for (int i = 0; i < 128; ++i) {
            const double a = 2.0 * std::numbers::pi * (double(i) + 0.3) / 128.0;
            const cplx zr = r * cplx(std::cos(a), std::sin(a));
            CHECK(std::abs(wp.eval(zr)) <= 1.0 / (r * r) + tail.M);
            const cplx zs = (r / double(k)) * cplx(std::cos(a), std::sin(a));
            CHECK(std::abs(wp.eval(zs)) >= double(k) * double(k) / (r * r) - tail.M);
        }
    }
}

TEST_CASE("star_condition_k: the gap implication on sampled radii") {
    const WeierstrassP wp(square, 60);
    const auto tail = bound_tail(wp, 0.3);
    const int k = star_condition_k(wp, tail);
    CHECK(k >= 2);

    // verify (*) on a sampled decreasing sequence: points of the k-shrunk disc
    // beat the sup of |wp| outside the r-disc
    for (int j = 1; j <= 6; ++j) {
        const double r = tail.r0 * std::pow(2.0, -double(j));
        double sup_outside = 0.0;
        const int steps = 48;
        for (int a = 0; a < steps; ++a)
            for (int b = 0; b < steps; ++b) {
                const double s = -0.5 + (double(a) + 0.5) / steps;
                const double t = -0.5 + (double(b) + 0.5) / steps;
                const cplx z = s * square.omega1() + t * square.omega2();
                if (std::abs(square.reduce(z)) < r || wp.pole_distance(z) < wp.pole_margin())
                    continue;
                sup_outside = std::max(sup_outside, std::abs(wp.eval(z)));
            }
        const double floor_inside = double(k * k) / (r * r) - tail.M;
        CHECK(floor_inside > sup_outside);
    }

    // doubling the truncation does not move k by more than 1
    const WeierstrassP wp2 = wp.with_truncation(120);
    const auto tail2 = bound_tail(wp2, 0.3);
    CHECK(std::abs(star_condition_k(wp2, tail2) - k) <= 1);
}
