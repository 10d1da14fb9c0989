#include "holoembed/holomap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "holoembed/errors.hpp"

namespace holoembed {

using ordered_json = nlohmann::ordered_json;

HoloMap::HoloMap(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}

HoloMap HoloMap::identity() { return HoloMap(Node(LinearGeneral{1.0, 0.0, 0.0, 1.0})); }

HoloMap HoloMap::contraction(cplx fz, cplx fw) {
    if (fz == cplx(0.0) || fw == cplx(0.0))
        throw std::invalid_argument("contraction: factors must be nonzero");
    return HoloMap(Node(DiagonalContraction{fz, fw}));
}

HoloMap HoloMap::linear_cross(cplx c1, cplx c2) {
    if (std::abs(std::abs(c1 * c2) - 1.0) < 1e-12)
        throw std::invalid_argument("linear_cross: |c1 c2| = 1 is not invertible");
    return HoloMap(Node(LinearCross{c1, c2}));
}

HoloMap HoloMap::linear(cplx a, cplx b, cplx c, cplx d) {
    const double scale = std::abs(a) + std::abs(b) + std::abs(c) + std::abs(d);
    if (std::abs(a * d - b * c) <= 1e-14 * scale * scale)
        throw std::invalid_argument("linear: matrix is singular");
    return HoloMap(Node(LinearGeneral{a, b, c, d}));
}

HoloMap HoloMap::translation(Vec2c offset) { return HoloMap(Node(Translation{offset})); }

HoloMap HoloMap::shear_poly(int axis, std::vector<cplx> coeffs) {
    return shear_poly_scaled(axis, std::move(coeffs), 0.0, 1.0);
}

HoloMap HoloMap::shear_poly_scaled(int axis, std::vector<cplx> coeffs, cplx center,
                                   double scale) {
    if (axis != 0 && axis != 1) throw std::invalid_argument("shear_poly: axis must be 0 or 1");
    if (scale <= 0.0) throw std::invalid_argument("shear_poly: scale must be positive");
    return HoloMap(Node(ShearPoly{axis, std::move(coeffs), center, scale}));
}

HoloMap HoloMap::rational_shear(std::vector<cplx> poles, std::vector<cplx> coeffs) {
    if (poles.size() != coeffs.size() || poles.empty())
        throw std::invalid_argument(
            "rational_shear: need matching nonempty poles and coefficients");
    for (std::size_t i = 0; i < poles.size(); ++i) {
        if (coeffs[i] == cplx(0.0))
            throw std::invalid_argument("rational_shear: coefficients must be nonzero");
        for (std::size_t j = i + 1; j < poles.size(); ++j)
            if (std::abs(poles[i] - poles[j]) < 1e-12 * (1.0 + std::abs(poles[i])))
                throw std::invalid_argument("rational_shear: duplicate pole");
    }
    return HoloMap(Node(RationalShear{std::move(poles), std::move(coeffs)}));
}

HoloMap HoloMap::twist(std::vector<cplx> h2) { return HoloMap(Node(Twist{std::move(h2)})); }

HoloMap HoloMap::composition(std::vector<HoloMap> in_application_order) {
    return HoloMap(Node(Composition{std::move(in_application_order)}));
}

HoloMap HoloMap::then(const HoloMap& next) const {
    std::vector<HoloMap> factors;
    if (const auto* c = std::get_if<Composition>(node_.get()))
        factors = c->factors;
    else
        factors.push_back(*this);
    if (const auto* c = std::get_if<Composition>(&next.node()))
        factors.insert(factors.end(), c->factors.begin(), c->factors.end());
    else
        factors.push_back(next);
    return composition(std::move(factors));
}

namespace {

cplx eval_h(const Twist& t, cplx u) {
    // h(u) = u^2 (h2[0] + h2[1] u + ...)
    return u * u * polyval(t.h2, u);
}

struct Evaluator {
    const Vec2c& x;

    Vec2c operator()(const DiagonalContraction& m) const { return {m.fz * x.z, m.fw * x.w}; }
    Vec2c operator()(const LinearCross& m) const { return {x.z + m.c1 * x.w, x.w + m.c2 * x.z}; }
    Vec2c operator()(const LinearGeneral& m) const {
        return {m.a * x.z + m.b * x.w, m.c * x.z + m.d * x.w};
    }
    Vec2c operator()(const Translation& m) const { return x + m.offset; }
    Vec2c operator()(const ShearPoly& m) const {
        if (m.axis == 0) return {x.z, x.w + polyval(m.coeffs, (x.z - m.center) / m.scale)};
        return {x.z + polyval(m.coeffs, (x.w - m.center) / m.scale), x.w};
    }
    Vec2c operator()(const RationalShear& m) const {
        cplx add = 0.0;
        for (std::size_t i = 0; i < m.poles.size(); ++i) {
            const cplx d = x.z - m.poles[i];
            if (std::abs(d) < 1e-12 * (1.0 + std::abs(x.z) + std::abs(m.poles[i]))) {
                std::ostringstream os;
                os << "rational shear: point on excluded fiber z = (" << m.poles[i].real() << ", "
                   << m.poles[i].imag() << ")";
                throw PoleFiberError(os.str());
            }
            add += m.coeffs[i] / d;
        }
        return {x.z, x.w + add};
    }
    Vec2c operator()(const Twist& m) const {
        const cplx e = std::exp(eval_h(m, x.z * x.w));
        return {x.z * e, x.w / e};
    }
    Vec2c operator()(const Composition& m) const {
        Vec2c cur = x;
        for (const HoloMap& f : m.factors) cur = f.eval(cur);
        return cur;
    }
};

struct Inverter {
    HoloMap operator()(const DiagonalContraction& m) const {
        return HoloMap::contraction(1.0 / m.fz, 1.0 / m.fw);
    }
    HoloMap operator()(const LinearCross& m) const {
        const cplx det = 1.0 - m.c1 * m.c2;
        return HoloMap::linear(1.0 / det, -m.c1 / det, -m.c2 / det, 1.0 / det);
    }
    HoloMap operator()(const LinearGeneral& m) const {
        const cplx det = m.a * m.d - m.b * m.c;
        return HoloMap::linear(m.d / det, -m.b / det, -m.c / det, m.a / det);
    }
    HoloMap operator()(const Translation& m) const {
        return HoloMap::translation({-m.offset.z, -m.offset.w});
    }
    HoloMap operator()(const ShearPoly& m) const {
        std::vector<cplx> neg(m.coeffs);
        for (cplx& c : neg) c = -c;
        return HoloMap::shear_poly_scaled(m.axis, std::move(neg), m.center, m.scale);
    }
    HoloMap operator()(const RationalShear&) const {
        throw NonInvertibleError("rational shear leaves have no symbolic inverse");
    }
    HoloMap operator()(const Twist& m) const {
        // zw is preserved, so negating h inverts the twist exactly
        std::vector<cplx> neg(m.h2);
        for (cplx& c : neg) c = -c;
        return HoloMap::twist(std::move(neg));
    }
    HoloMap operator()(const Composition& m) const {
        std::vector<HoloMap> rev;
        rev.reserve(m.factors.size());
        for (auto it = m.factors.rbegin(); it != m.factors.rend(); ++it)
            rev.push_back(it->inverse());
        return HoloMap::composition(std::move(rev));
    }
};

}  // namespace

Vec2c HoloMap::eval(const Vec2c& x) const { return std::visit(Evaluator{x}, *node_); }

HoloMap HoloMap::inverse() const { return std::visit(Inverter{}, *node_); }

bool HoloMap::has_rational_shear() const {
    if (std::holds_alternative<RationalShear>(*node_)) return true;
    if (const auto* c = std::get_if<Composition>(node_.get())) {
        for (const HoloMap& f : c->factors)
            if (f.has_rational_shear()) return true;
    }
    return false;
}

MapDomain HoloMap::domain() const {
    MapDomain d;
    if (const auto* r = std::get_if<RationalShear>(node_.get())) {
        d.excluded_fibers = r->poles;
    } else if (const auto* c = std::get_if<Composition>(node_.get())) {
        for (const HoloMap& f : c->factors) {
            const MapDomain sub = f.domain();
            d.excluded_fibers.insert(d.excluded_fibers.end(), sub.excluded_fibers.begin(),
                                     sub.excluded_fibers.end());
        }
    }
    return d;
}

double HoloMap::identity_distance(double r, int samples_per_axis) const {
    double worst = 0.0;
    const int n = samples_per_axis;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    const Vec2c x{
                        cplx(-r + 2.0 * r * (a + 0.5) / n, -r + 2.0 * r * (b + 0.5) / n),
                        cplx(-r + 2.0 * r * (c + 0.5) / n, -r + 2.0 * r * (d + 0.5) / n)};
                    if (norm2(x) > r) continue;
                    worst = std::max(worst, dist2(eval(x), x));
                }
    return worst;
}

cplx jacobian_det(const HoloMap& f, const Vec2c& x, double h) {
    if (h <= 0.0) h = 1e-5 * (1.0 + norm2(x));
    const Vec2c fz = (1.0 / (2.0 * h)) * (f.eval({x.z + h, x.w}) - f.eval({x.z - h, x.w}));
    const Vec2c fw = (1.0 / (2.0 * h)) * (f.eval({x.z, x.w + h}) - f.eval({x.z, x.w - h}));
    return fz.z * fw.w - fw.z * fz.w;
}

// --------------------------------------------------------------------------
// serialization
// --------------------------------------------------------------------------

namespace {

ordered_json c_to_json(cplx v) { return ordered_json::array({v.real(), v.imag()}); }

cplx c_from_json(const ordered_json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

ordered_json clist_to_json(const std::vector<cplx>& v) {
    ordered_json out = ordered_json::array();
    for (cplx c : v) out.push_back(c_to_json(c));
    return out;
}

std::vector<cplx> clist_from_json(const ordered_json& j) {
    std::vector<cplx> out;
    for (const auto& e : j) out.push_back(c_from_json(e));
    return out;
}

struct Serializer {
    ordered_json operator()(const DiagonalContraction& m) const {
        return {{"kind", "contraction"}, {"fz", c_to_json(m.fz)}, {"fw", c_to_json(m.fw)}};
    }
    ordered_json operator()(const LinearCross& m) const {
        return {{"kind", "linear_cross"}, {"c1", c_to_json(m.c1)}, {"c2", c_to_json(m.c2)}};
    }
    ordered_json operator()(const LinearGeneral& m) const {
        return {{"kind", "linear"},
                {"a", c_to_json(m.a)},
                {"b", c_to_json(m.b)},
                {"c", c_to_json(m.c)},
                {"d", c_to_json(m.d)}};
    }
    ordered_json operator()(const Translation& m) const {
        return {{"kind", "translation"},
                {"dz", c_to_json(m.offset.z)},
                {"dw", c_to_json(m.offset.w)}};
    }
    ordered_json operator()(const ShearPoly& m) const {
        return {{"kind", "shear_poly"},
                {"axis", m.axis},
                {"coeffs", clist_to_json(m.coeffs)},
                {"center", c_to_json(m.center)},
                {"scale", m.scale}};
    }
    ordered_json operator()(const RationalShear& m) const {
        return {{"kind", "rational_shear"},
                {"poles", clist_to_json(m.poles)},
                {"coeffs", clist_to_json(m.coeffs)}};
    }
    ordered_json operator()(const Twist& m) const {
        return {{"kind", "twist"}, {"h2", clist_to_json(m.h2)}};
    }
    ordered_json operator()(const Composition& m) const;
};

ordered_json node_to_json(const HoloMap& f) { return std::visit(Serializer{}, f.node()); }

ordered_json Serializer::operator()(const Composition& m) const {
    ordered_json factors = ordered_json::array();
    for (const HoloMap& f : m.factors) factors.push_back(node_to_json(f));
    return {{"kind", "composition"}, {"factors", std::move(factors)}};
}

HoloMap map_from_json(const ordered_json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "contraction")
        return HoloMap::contraction(c_from_json(j.at("fz")), c_from_json(j.at("fw")));
    if (kind == "linear_cross")
        return HoloMap::linear_cross(c_from_json(j.at("c1")), c_from_json(j.at("c2")));
    if (kind == "linear")
        return HoloMap::linear(c_from_json(j.at("a")), c_from_json(j.at("b")),
                               c_from_json(j.at("c")), c_from_json(j.at("d")));
    if (kind == "translation")
        return HoloMap::translation({c_from_json(j.at("dz")), c_from_json(j.at("dw"))});
    if (kind == "shear_poly")
        return HoloMap::shear_poly_scaled(j.at("axis").get<int>(),
                                          clist_from_json(j.at("coeffs")),
                                          c_from_json(j.at("center")), j.at("scale").get<double>());
    if (kind == "rational_shear")
        return HoloMap::rational_shear(clist_from_json(j.at("poles")),
                                       clist_from_json(j.at("coeffs")));
    if (kind == "twist") return HoloMap::twist(clist_from_json(j.at("h2")));
    if (kind == "composition") {
        std::vector<HoloMap> factors;
        for (const auto& e : j.at("factors")) factors.push_back(map_from_json(e));
        return HoloMap::composition(std::move(factors));
    }
    throw std::invalid_argument("HoloMap::from_json: unknown kind '" + kind + "'");
}

}  // namespace

std::string HoloMap::to_json() const { return node_to_json(*this).dump(); }

HoloMap HoloMap::from_json(const std::string& text) {
    return map_from_json(ordered_json::parse(text));
}

HoloMap rational_shear_from_boundary(const std::vector<std::pair<cplx, cplx>>& pole_data,
                                     const std::vector<cplx>& coeffs) {
    std::vector<cplx> poles;
    poles.reserve(pole_data.size());
    for (const auto& [z0, deriv] : pole_data) {
        if (deriv == cplx(0.0))
            throw std::invalid_argument("rational_shear_from_boundary: zero boundary derivative");
        poles.push_back(z0);
    }
    return HoloMap::rational_shear(std::move(poles), coeffs);
}

ShearCoeffChoice choose_shear_coeffs(const std::vector<ShearCurveData>& curves,
                                     double magnitude) {
    if (curves.empty()) throw std::invalid_argument("choose_shear_coeffs: no curves");
    const std::size_t m = curves.size();

    // Phases arg(a_i / c_i) = pi i / m spread the 2m asymptotic rays
    // w(0) + a_i / (c_i t) uniformly over directions.
    std::vector<cplx> coeffs(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (curves[i].tangent_z == cplx(0.0))
            throw std::invalid_argument("choose_shear_coeffs: zero marked tangent");
        const cplx unit_c = curves[i].tangent_z / std::abs(curves[i].tangent_z);
        coeffs[i] =
            magnitude * std::polar(1.0, std::numbers::pi * double(i) / double(m)) * unit_c;
    }

    std::vector<cplx> poles(m);
    for (std::size_t i = 0; i < m; ++i) poles[i] = curves[i].marked.z;
    const HoloMap shear = HoloMap::rational_shear(poles, coeffs);

    struct Half {
        std::size_t curve;
        int sign;
        std::vector<cplx> pi2;  // ordered by |t| decreasing
    };
    std::vector<Half> halves;
    for (std::size_t i = 0; i < m; ++i) {
        for (int sign : {+1, -1}) {
            Half h{i, sign, {}};
            std::vector<std::pair<double, Vec2c>> side;
            for (const auto& s : curves[i].near_samples)
                if ((sign > 0 && s.first > 0.0) || (sign < 0 && s.first < 0.0))
                    side.push_back(s);
            std::sort(side.begin(), side.end(), [](const auto& a, const auto& b) {
                return std::abs(a.first) > std::abs(b.first);
            });
            for (const auto& s : side) h.pi2.push_back(shear.eval(s.second).w);
            if (h.pi2.size() < 2)
                throw std::invalid_argument(
                    "choose_shear_coeffs: need samples on both curve sides");
            halves.push_back(std::move(h));
        }
    }

    ShearCoeffChoice out;
    out.coeffs = coeffs;
    out.worst_monotone_step = std::numeric_limits<double>::max();
    for (const Half& h : halves) {
        for (std::size_t k = 0; k + 1 < h.pi2.size(); ++k) {
            const double step = std::abs(h.pi2[k + 1]) - std::abs(h.pi2[k]);
            out.worst_monotone_step = std::min(out.worst_monotone_step, step);
            if (step <= 0.0) {
                std::ostringstream os;
                os << "choose_shear_coeffs: |pi2| not increasing toward t=0 on curve " << h.curve
                   << (h.sign > 0 ? "+" : "-") << " (shrink the near-zero window)";
                throw SearchExhaustedError(os.str());
            }
        }
    }
    out.min_cross_separation = std::numeric_limits<double>::max();
    for (std::size_t a = 0; a < halves.size(); ++a)
        for (std::size_t b = a + 1; b < halves.size(); ++b) {
            double sep = std::numeric_limits<double>::max();
            for (cplx u : halves[a].pi2)
                for (cplx v : halves[b].pi2) sep = std::min(sep, std::abs(u - v));
            if (sep <= 0.0) {
                std::ostringstream os;
                os << "choose_shear_coeffs: traces " << halves[a].curve
                   << (halves[a].sign > 0 ? "+" : "-") << " and " << halves[b].curve
                   << (halves[b].sign > 0 ? "+" : "-") << " intersect";
                throw SearchExhaustedError(os.str());
            }
            out.min_cross_separation = std::min(out.min_cross_separation, sep);
        }
    return out;
}

}  // namespace holoembed
