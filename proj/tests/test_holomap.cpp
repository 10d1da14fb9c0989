#include "doctest.h"

#include <cmath>

#include "holoembed/errors.hpp"
#include "holoembed/holomap.hpp"
#include "holoembed/rng.hpp"

using namespace holoembed;

namespace {

HoloMap random_invertible_leaf(Rng& rng) {
    switch (rng.raw() % 5) {
        case 0:
            return HoloMap::contraction(rng.disc(1.0) + cplx(1.5, 0.0),
                                        rng.disc(1.0) + cplx(1.5, 0.0));
        case 1:
            return HoloMap::linear_cross(rng.disc(0.4), rng.disc(0.4));
        case 2:
            return HoloMap::translation({rng.disc(0.5), rng.disc(0.5)});
        case 3:
            return HoloMap::shear_poly(int(rng.raw() % 2), {rng.disc(0.3), rng.disc(0.3)});
        default:
            return HoloMap::twist({rng.disc(0.2)});
    }
}

}  // namespace

TEST_CASE("leaf construction guards") {
    CHECK_THROWS_AS(HoloMap::contraction(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(HoloMap::linear_cross(cplx(0.5, 0.0), cplx(2.0, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(HoloMap::linear(1.0, 2.0, 2.0, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(HoloMap::rational_shear({cplx(1.0, 0.0), cplx(1.0, 0.0)}, {1.0, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(HoloMap::rational_shear({cplx(1.0, 0.0)}, {cplx(0.0, 0.0)}),
                    std::invalid_argument);
}

TEST_CASE("eval: contraction, twist identity, zw preservation") {
    const HoloMap halve = HoloMap::contraction(0.5, 0.5);
    const Vec2c y = halve.eval({cplx(2.0, 0.0), cplx(2.0, 0.0)});
    CHECK(y.z == cplx(1.0, 0.0));
    CHECK(y.w == cplx(1.0, 0.0));

    const HoloMap trivial = HoloMap::twist({});
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const Vec2c x = rng.ball2(2.0);
        const Vec2c t = trivial.eval(x);
        CHECK(t.z == x.z);
        CHECK(t.w == x.w);
    }

    const HoloMap tw = HoloMap::twist({cplx(0.7, -0.3)});
    for (int i = 0; i < 200; ++i) {
        const Vec2c x = rng.ball2(2.0);
        const Vec2c y2 = tw.eval(x);
        const cplx before = x.z * x.w, after = y2.z * y2.w;
        CHECK(std::abs(after - before) <= 1e-12 * std::abs(before));
    }

    // twist with h(0) = 0 fixes both coordinate axes
    const Vec2c on_axis = tw.eval({cplx(0.0, 0.0), cplx(1.3, -0.4)});
    CHECK(on_axis.z == cplx(0.0, 0.0));
    CHECK(on_axis.w == cplx(1.3, -0.4));
}

TEST_CASE("shears never touch the other coordinate (bit-exact)") {
    Rng rng(17);
    const HoloMap s0 = HoloMap::shear_poly(0, {cplx(0.3, 0.1), cplx(-0.2, 0.4), cplx(0.05, 0.0)});
    const HoloMap rs = HoloMap::rational_shear({cplx(3.0, 0.0)}, {cplx(1.0, 0.5)});
    for (int i = 0; i < 100; ++i) {
        const Vec2c x = rng.ball2(2.0);
        CHECK(s0.eval(x).z == x.z);
        CHECK(rs.eval(x).z == x.z);
    }
}

TEST_CASE("inverse: leaves and deep compositions") {
    CHECK_THROWS_AS(HoloMap::rational_shear({cplx(1.0, 0.0)}, {cplx(1.0, 0.0)}).inverse(),
                    NonInvertibleError);

    const HoloMap halve = HoloMap::contraction(0.5, 0.5);
    const Vec2c two{cplx(1.0, 0.0), cplx(1.0, 0.0)};
    CHECK(dist2(halve.inverse().eval(two), {cplx(2.0, 0.0), cplx(2.0, 0.0)}) < 1e-15);

    Rng rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const HoloMap f = HoloMap::composition({random_invertible_leaf(rng),
                                                random_invertible_leaf(rng),
                                                random_invertible_leaf(rng)});
        const HoloMap finv = f.inverse();
        for (int i = 0; i < 10; ++i) {
            const Vec2c x = rng.ball2(2.0);
            CHECK(dist2(finv.eval(f.eval(x)), x) <= 1e-10);
            CHECK(dist2(f.eval(finv.eval(x)), x) <= 1e-10);
        }
    }

    // twist round trip
    const HoloMap tw = HoloMap::twist({cplx(0.2, 0.1), cplx(0.0, -0.1)});
    const HoloMap tw_inv = tw.inverse();
    for (int i = 0; i < 100; ++i) {
        const Vec2c x = rng.ball2(2.0);
        CHECK(dist2(tw_inv.eval(tw.eval(x)), x) <= 1e-10);
    }
}

TEST_CASE("shear inverse negates the coefficients structurally") {
    const HoloMap s = HoloMap::shear_poly(0, {cplx(0.3, 0.1), cplx(-0.2, 0.4)});
    const HoloMap s_inv = s.inverse();
    const auto* leaf = std::get_if<ShearPoly>(&s_inv.node());
    REQUIRE(leaf != nullptr);
    CHECK(leaf->coeffs[0] == -cplx(0.3, 0.1));
    CHECK(leaf->coeffs[1] == -cplx(-0.2, 0.4));

    const HoloMap tw_inv = HoloMap::twist({cplx(0.5, -0.25)}).inverse();
    const auto* tleaf = std::get_if<Twist>(&tw_inv.node());
    REQUIRE(tleaf != nullptr);
    CHECK(tleaf->h2[0] == -cplx(0.5, -0.25));
}

TEST_CASE("composition is associative bit-exactly") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const HoloMap f = random_invertible_leaf(rng);
        const HoloMap g = random_invertible_leaf(rng);
        const HoloMap h = random_invertible_leaf(rng);
        const HoloMap left = HoloMap::composition({HoloMap::composition({f, g}), h});
        const HoloMap right = HoloMap::composition({f, HoloMap::composition({g, h})});
        for (int i = 0; i < 10; ++i) {
            const Vec2c x = rng.ball2(2.0);
            const Vec2c a = left.eval(x), b = right.eval(x);
            CHECK(a.z == b.z);
            CHECK(a.w == b.w);
        }
    }
}

TEST_CASE("composition order: factors apply first to last") {
    const HoloMap first = HoloMap::translation({cplx(1.0, 0.0), cplx(0.0, 0.0)});
    const HoloMap second = HoloMap::contraction(0.5, 0.5);
    const Vec2c x{cplx(0.0, 0.0), cplx(0.0, 0.0)};
    const Vec2c y = HoloMap::composition({first, second}).eval(x);
    CHECK(y.z == cplx(0.5, 0.0));  // translated, then halved
    CHECK(dist2(first.then(second).eval(x), y) == 0.0);
}

TEST_CASE("jacobian determinants") {
    Rng rng(41);
    const HoloMap tw = HoloMap::twist({cplx(0.3, 0.2)});
    for (int i = 0; i < 30; ++i) {
        const Vec2c x = rng.ball2(1.5);
        CHECK(std::abs(jacobian_det(tw, x) - 1.0) < 1e-6 * (1.0 + norm2(x)));
    }
    CHECK(std::abs(jacobian_det(HoloMap::contraction(0.5, 0.5), rng.ball2(1.0)) - 0.25) < 1e-9);
    const cplx c1(0.3, 0.1), c2(-0.2, 0.4);
    CHECK(std::abs(jacobian_det(HoloMap::linear_cross(c1, c2), rng.ball2(1.0)) -
                   (1.0 - c1 * c2)) < 1e-9);
}

TEST_CASE("rational shear: basic eval, fiber error, domain") {
    const HoloMap rs = HoloMap::rational_shear({cplx(0.0, 0.0)}, {cplx(1.0, 0.0)});
    const Vec2c y = rs.eval({cplx(1.0, 0.0), cplx(0.0, 0.0)});
    CHECK(y.z == cplx(1.0, 0.0));
    CHECK(y.w == cplx(1.0, 0.0));
    CHECK_THROWS_AS(rs.eval({cplx(0.0, 0.0), cplx(1.0, 0.0)}), PoleFiberError);

    CHECK(rs.domain().excluded_fibers.size() == 1);
    CHECK(HoloMap::twist({}).domain().everywhere_defined());
    CHECK(rs.has_rational_shear());
    CHECK(HoloMap::composition({HoloMap::twist({}), rs}).has_rational_shear());

    // second coordinate blows up along any path into the pole fiber
    double prev = 0.0;
    for (double eps : {1e-2, 1e-4, 1e-6}) {
        const double mag = std::abs(rs.eval({cplx(eps, 0.0), cplx(0.0, 0.0)}).w);
        CHECK(mag > prev);
        prev = mag;
    }
}

TEST_CASE("serialization round-trips losslessly") {
    Rng rng(59);
    std::vector<HoloMap> maps = {
        HoloMap::contraction(cplx(0.5, 0.125), cplx(-0.25, 1.0 / 3.0)),
        HoloMap::linear_cross(rng.disc(0.4), rng.disc(0.4)),
        HoloMap::linear(1.0, cplx(0.1, 0.2), cplx(-0.3, 0.07), cplx(0.9, 0.0)),
        HoloMap::translation({rng.disc(2.0), rng.disc(2.0)}),
        HoloMap::shear_poly(1, {rng.disc(1.0), rng.disc(1.0), rng.disc(1.0)}),
        HoloMap::rational_shear({cplx(1.0, 1.0), rng.disc(0.5) + cplx(4.0, 0.0)},
                                {rng.disc(1.0) + cplx(2.0, 0.0), cplx(0.0, 1.0 / 7.0)}),
        HoloMap::twist({rng.disc(0.3), rng.disc(0.3)}),
    };
    maps.push_back(HoloMap::composition({maps[0], maps[4], maps[6]}));

    Rng probe(61);
    for (const HoloMap& f : maps) {
        const HoloMap g = HoloMap::from_json(f.to_json());
        CHECK(f.to_json() == g.to_json());
        for (int i = 0; i < 12; ++i) {
            Vec2c x = probe.ball2(2.0);
            if (f.has_rational_shear()) x.z += cplx(8.0, 0.0);  // stay off pole fibers
            const Vec2c a = f.eval(x), b = g.eval(x);
            CHECK(a.z == b.z);
            CHECK(a.w == b.w);
        }
    }
}

TEST_CASE("choose_shear_coeffs: opposite rays for one curve, four rays for two") {
    auto make_curve = [](cplx z0, cplx c, cplx w0, double curving) {
        ShearCurveData data;
        data.marked = {z0, w0};
        data.tangent_z = c;
        for (double t :
             {-0.2, -0.15, -0.1, -0.05, -0.02, -0.01, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2})
            data.near_samples.push_back({t, {z0 + c * t, w0 + curving * t * t}});
        return data;
    };

    const auto one = choose_shear_coeffs({make_curve(0.0, 1.0, 0.0, 0.3)});
    CHECK(one.coeffs.size() == 1);
    CHECK(one.min_cross_separation > 0.0);
    CHECK(one.worst_monotone_step > 0.0);

    const auto two = choose_shear_coeffs({make_curve(0.0, 1.0, 0.0, 0.3),
                                          make_curve(cplx(5.0, 0.0), cplx(0.0, 1.0),
                                                     cplx(1.0, 0.0), 0.1)});
    CHECK(two.coeffs.size() == 2);
    // the spread phases put the rays of the two curves 90 degrees apart
    const double a0 = std::arg(two.coeffs[0] / cplx(1.0, 0.0));
    const double a1 = std::arg(two.coeffs[1] / cplx(0.0, 1.0));
    CHECK(std::abs(a1 - a0) == doctest::Approx(1.5707963267948966).epsilon(1e-9));
    CHECK(two.min_cross_separation > 0.0);
}

TEST_CASE("identity_distance") {
    CHECK(HoloMap::identity().identity_distance(1.0) == 0.0);
    const double d =
        HoloMap::translation({cplx(0.05, 0.0), cplx(0.0, 0.0)}).identity_distance(1.0);
    CHECK(d == doctest::Approx(0.05));
}
