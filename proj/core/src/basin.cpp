#include "holoembed/basin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "holoembed/errors.hpp"
#include "holoembed/rng.hpp"

namespace holoembed {

HoloMap halving_map() { return HoloMap::contraction(0.5, 0.5); }

AutoSequence::AutoSequence(std::vector<HoloMap> maps) {
    for (auto& f : maps) push_back(std::move(f));
}

void AutoSequence::push_back(HoloMap f) {
    if (f.has_rational_shear())
        throw std::invalid_argument("AutoSequence: entries must be invertible automorphisms");
    maps_.push_back(std::move(f));
}

const HoloMap& AutoSequence::prefix(std::size_t j) const {
    if (j > maps_.size()) throw std::out_of_range("AutoSequence::prefix");
    if (prefixes_.empty()) prefixes_.push_back(HoloMap::identity());
    while (prefixes_.size() <= j) {
        const std::size_t next = prefixes_.size();
        prefixes_.push_back(prefixes_.back().then(maps_[next - 1]));
    }
    return prefixes_[j];
}

Vec2c AutoSequence::apply_prefix(std::size_t j, const Vec2c& x) const {
    Vec2c cur = x;
    for (std::size_t i = 0; i < j; ++i) cur = maps_[i].eval(cur);
    return cur;
}

AutoSequence AutoSequence::constant(const HoloMap& f, std::size_t length) {
    AutoSequence seq;
    for (std::size_t i = 0; i < length; ++i) seq.push_back(f);
    return seq;
}

BasinVerdict basin_membership(const AutoSequence& seq, const Vec2c& x, const BasinQuery& q) {
    if (q.convergence_radius >= q.escape_radius)
        throw std::invalid_argument("BasinQuery: convergence radius must stay below escape");
    Vec2c cur = x;
    double prev_norm = norm2(cur);
    if (prev_norm == 0.0) return {BasinVerdict::Kind::converged, 0, 0.0};

    const std::size_t limit = std::min(q.max_iterations, seq.size());
    int streak = 0;
    double ratio_product = 1.0;
    for (std::size_t j = 1; j <= limit; ++j) {
        cur = seq.map(j - 1).eval(cur);
        const double n = norm2(cur);
        if (n > q.escape_radius) return {BasinVerdict::Kind::escaped, j, 0.0};
        if (n == 0.0) return {BasinVerdict::Kind::converged, j, 0.0};
        const double ratio = n / prev_norm;
        prev_norm = n;
        if (n < q.convergence_radius && ratio <= 0.75) {
            ++streak;
            ratio_product *= ratio;
            if (streak == 5)
                return {BasinVerdict::Kind::converged, j, std::pow(ratio_product, 1.0 / 5.0)};
        } else {
            streak = 0;
            ratio_product = 1.0;
        }
    }
    return {BasinVerdict::Kind::undecided, limit, 0.0};
}

StarCheck check_star(const HoloMap& sigma, double delta, std::span<const Vec2c> ball_samples) {
    const HoloMap a = halving_map();
    StarCheck out;
    double worst = 0.0;
    for (const Vec2c& x : ball_samples) {
        const double d = dist2(sigma.eval(x), a.eval(x));
        if (d > worst) {
            worst = d;
            out.witness = x;
        }
    }
    out.worst_margin = delta - worst;
    out.pass = out.worst_margin > 0.0;
    return out;
}

std::vector<Vec2c> ball_samples(double radius, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vec2c> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(rng.ball2(radius));
    return out;
}

PusherResult model_pusher(const PusherRequest& req, const ModelPusherOptions& opts) {
    if (req.k_samples.empty() || req.v_samples.empty())
        throw std::invalid_argument("model_pusher: need K and V samples");
    if (req.epsilon <= 0.0 || req.target_radius <= 0.0)
        throw std::invalid_argument("model_pusher: epsilon and target radius must be positive");

    // pi1 separation is the model precondition
    double sep = 1e300;
    for (const Vec2c& k : req.k_samples)
        for (const Vec2c& v : req.v_samples) sep = std::min(sep, std::abs(k.z - v.z));
    if (sep <= 0.0)
        throw std::invalid_argument("model_pusher: pi1(K) and pi1(curve) are not separated");

    // affine normalization of the fit variable
    cplx center = 0.0;
    for (const Vec2c& k : req.k_samples) center += k.z;
    center /= double(req.k_samples.size());
    double scale = 0.0;
    for (const Vec2c& k : req.k_samples) scale = std::max(scale, std::abs(k.z - center));
    for (const Vec2c& v : req.v_samples) scale = std::max(scale, std::abs(v.z - center));
    if (scale == 0.0) scale = 1.0;

    // only curve samples not already beyond the target radius constrain the
    // fit; a monomial tail that keeps growing past them expels the rest
    const std::size_t nk = req.k_samples.size();
    std::vector<std::size_t> pushed;
    for (std::size_t i = 0; i < req.v_samples.size(); ++i)
        if (norm2(req.v_samples[i]) < 1.2 * req.target_radius) pushed.push_back(i);
    const std::size_t nv = pushed.size();
    std::vector<double> tau(nv);
    for (std::size_t i = 0; i < nv; ++i)
        tau[i] = 2.0 * req.target_radius + norm2(req.v_samples[pushed[i]]);
    const double k_weight = 1.0 / (0.5 * req.epsilon);

    std::ostringstream stats;
    stats << "pi1 separation " << sep << ", " << nk << " K samples, " << nv << " of "
          << req.v_samples.size() << " curve samples constrained";

    double u_min = 1e300;
    std::vector<cplx> u_pushed(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        u_pushed[i] = (req.v_samples[pushed[i]].z - center) / scale;
        u_min = std::min(u_min, std::abs(u_pushed[i]));
    }

    for (int degree = 1; degree <= opts.max_degree; degree = std::min(2 * degree, degree + 32)) {
        const int cols = degree + 1;
        // expulsion bounds are one-sided, so the fitted targets follow the
        // feasible monomial growth profile instead of a flat plateau (which a
        // monomial basis cannot carry across a wide modulus range)
        double tau_hat = 0.0;
        for (std::size_t i = 0; i < nv; ++i)
            tau_hat = std::max(tau_hat,
                               tau[i] * std::pow(u_min / std::abs(u_pushed[i]), double(degree)));
        std::vector<cplx> fitted(nv);
        for (std::size_t i = 0; i < nv; ++i) {
            cplx growth = 1.0;
            const cplx base = u_pushed[i] / u_min;
            for (int c = 0; c < degree; ++c) growth *= base;
            fitted[i] = tau_hat * growth;
        }

        Eigen::MatrixXcd m(nk + nv, cols);
        Eigen::VectorXcd rhs(nk + nv);
        auto fill_row = [&](std::size_t row, cplx z, double weight, cplx value) {
            cplx pow = 1.0;
            const cplx u = (z - center) / scale;
            for (int c = 0; c < cols; ++c) {
                m(long(row), c) = weight * pow;
                pow *= u;
            }
            rhs(long(row)) = weight * value;
        };
        for (std::size_t i = 0; i < nk; ++i)
            fill_row(i, req.k_samples[i].z, k_weight, 0.0);
        for (std::size_t i = 0; i < nv; ++i)
            fill_row(nk + i, req.v_samples[pushed[i]].z, 1e6 / std::abs(fitted[i]), fitted[i]);

        Eigen::VectorXcd sol = m.colPivHouseholderQr().solve(rhs);
        std::vector<cplx> coeffs(sol.size());
        for (long i = 0; i < sol.size(); ++i) coeffs[std::size_t(i)] = sol(i);

        auto g_at = [&](cplx z) { return polyval(coeffs, (z - center) / scale); };

        if (req.fixed_point) {
            const cplx fp_z = req.fixed_point->z;
            bool on_curve = false;
            for (const Vec2c& v : req.v_samples)
                if (std::abs(v.z - fp_z) < 1e-12 * (1.0 + std::abs(fp_z))) on_curve = true;
            if (!on_curve) coeffs[0] -= g_at(fp_z);
        }

        double disp = 0.0;
        for (const Vec2c& k : req.k_samples) disp = std::max(disp, std::abs(g_at(k.z)));
        double floor = 1e300;
        for (const Vec2c& v : req.v_samples) {
            const cplx w2 = v.w + g_at(v.z);
            floor = std::min(floor, std::sqrt(std::norm(v.z) + std::norm(w2)));
        }
        if (req.fixed_point) {
            const Vec2c p = *req.fixed_point;
            disp = std::max(disp, std::abs(g_at(p.z)));
        }

        if (disp <= req.epsilon && floor >= req.target_radius) {
            PusherResult out;
            out.map = HoloMap::shear_poly_scaled(0, coeffs, center, scale);
            out.k_displacement = disp;
            out.expulsion_floor = floor;
            out.degree = degree;
            return out;
        }
        if (degree == opts.max_degree) break;
    }
    throw SearchExhaustedError("model_pusher: degree cap reached (" + stats.str() + ")");
}

InductionState fb_induction_start(std::vector<Vec2c> k1, std::vector<Vec2c> v,
                                  const InductionOptions& opts) {
    InductionState st;
    st.options = opts;
    st.step = 1;
    st.sequence.push_back(halving_map());
    st.k_samples = std::move(k1);
    st.v_samples = std::move(v);
    st.k_images.reserve(st.k_samples.size());
    st.v_images.reserve(st.v_samples.size());
    const HoloMap a = halving_map();
    double kmax = 0.0, vmin = 1e300;
    for (const Vec2c& x : st.k_samples) {
        st.k_images.push_back(a.eval(x));
        kmax = std::max(kmax, norm2(st.k_images.back()));
    }
    for (const Vec2c& x : st.v_samples) {
        st.v_images.push_back(a.eval(x));
        vmin = std::min(vmin, norm2(st.v_images.back()));
    }
    st.margin_b = 1.0 - kmax;
    st.margin_c = vmin - 1.0;
    if (st.margin_b <= 0.0)
        throw std::invalid_argument("fb_induction_start: A(K_1) must land inside the unit ball");
    if (st.margin_c <= 0.0)
        throw std::invalid_argument("fb_induction_start: A(V) must stay outside the closed ball");
    return st;
}

InductionState fb_induction_step(const InductionState& state, std::vector<Vec2c> k_next,
                                 const Pusher& pusher) {
    const InductionOptions& opts = state.options;
    const std::size_t j = state.step;

    // K = unit-ball samples plus the pushed-forward next compact
    std::vector<Vec2c> k_set = ball_samples(1.0, opts.ball_sample_count, opts.seed);
    std::vector<Vec2c> k_next_images;
    k_next_images.reserve(k_next.size());
    for (const Vec2c& x : k_next)
        k_next_images.push_back(state.sequence.apply_prefix(j, x));
    k_set.insert(k_set.end(), k_next_images.begin(), k_next_images.end());

    double k_max = 0.0;
    for (const Vec2c& x : k_set) k_max = std::max(k_max, norm2(x));
    // minimal contraction power with the safety margin: A^s(K) lands in the
    // half ball, not just inside B_1
    int s = 0;
    double shrunk = k_max;
    while (shrunk > 0.5) {
        shrunk /= 2.0;
        ++s;
    }
    const double big_r = std::pow(2.0, double(s + 1));
    const double eps_j = opts.epsilon0 * std::pow(2.0, -double(j));

    PusherRequest req;
    req.k_samples = k_set;
    req.v_samples = state.v_images;
    req.target_radius = big_r;
    req.epsilon = eps_j;
    // nothing to expel: the identity satisfies Condition 1 vacuously
    const PusherResult pushed =
        state.v_images.empty()
            ? PusherResult{HoloMap::identity(), 0.0, std::numeric_limits<double>::infinity(), 0}
            : pusher(req);
    if (pushed.k_displacement > eps_j || pushed.expulsion_floor < big_r) {
        std::ostringstream os;
        os << "fb_induction_step: pusher shortfall (displacement " << pushed.k_displacement
           << " vs eps " << eps_j << ", floor " << pushed.expulsion_floor << " vs R " << big_r
           << ")";
        throw SearchExhaustedError(os.str());
    }

    // F_{j+1} = A^s o phi, checked factor by factor against (*)
    std::vector<HoloMap> factors;
    factors.push_back(pushed.map);
    for (int i = 0; i < s; ++i) factors.push_back(halving_map());
    const HoloMap f_next = HoloMap::composition(factors);

    const auto ball = ball_samples(1.0, opts.ball_sample_count, opts.seed + 1);
    const HoloMap first_factor = HoloMap::composition({pushed.map, halving_map()});
    const StarCheck star = check_star(s >= 1 ? first_factor : pushed.map, opts.delta, ball);
    if (!star.pass) {
        std::ostringstream os;
        os << "fb_induction_step: (*) violated by " << -star.worst_margin
           << "; choose a smaller epsilon";
        throw SearchExhaustedError(os.str());
    }

    InductionState next;
    next.options = opts;
    next.step = j + 1;
    next.sequence = state.sequence;
    next.sequence.push_back(f_next);
    next.k_samples = std::move(k_next);
    next.v_samples = state.v_samples;
    next.k_images.reserve(k_next_images.size());
    for (const Vec2c& x : k_next_images) next.k_images.push_back(f_next.eval(x));
    next.v_images.reserve(state.v_images.size());
    for (const Vec2c& x : state.v_images) next.v_images.push_back(f_next.eval(x));

    double kmax = 0.0, vmin = 1e300;
    for (const Vec2c& x : next.k_images) kmax = std::max(kmax, norm2(x));
    for (const Vec2c& x : next.v_images) vmin = std::min(vmin, norm2(x));
    next.margin_b = 1.0 - kmax;
    next.margin_c = vmin - 1.0;
    if (next.margin_b <= 0.0 || next.margin_c <= 0.0) {
        std::ostringstream os;
        os << "fb_induction_step: induction hypotheses lost (b margin " << next.margin_b
           << ", c margin " << next.margin_c << "); choose a smaller epsilon";
        throw SearchExhaustedError(os.str());
    }
    return next;
}

std::string auto_sequence_to_json(const AutoSequence& seq) {
    nlohmann::ordered_json j;
    auto arr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < seq.size(); ++i)
        arr.push_back(nlohmann::ordered_json::parse(seq.map(i).to_json()));
    j["maps"] = std::move(arr);
    return j.dump(2);
}

AutoSequence auto_sequence_from_json(const std::string& text) {
    const auto j = nlohmann::ordered_json::parse(text);
    AutoSequence seq;
    for (const auto& e : j.at("maps")) seq.push_back(HoloMap::from_json(e.dump()));
    return seq;
}

std::vector<double> hull_estimate(std::span<const Vec2c> k_samples,
                                  std::span<const Vec2c> probes, int degree,
                                  const HullOptions& opts) {
    if (degree < 1) throw std::invalid_argument("hull_estimate: degree must be >= 1");
    if (k_samples.empty()) throw std::invalid_argument("hull_estimate: empty K");

    // affine normalization from the K bounding box
    cplx zc = 0.0, wc = 0.0;
    for (const Vec2c& k : k_samples) {
        zc += k.z;
        wc += k.w;
    }
    zc /= double(k_samples.size());
    wc /= double(k_samples.size());
    double rz = 0.0, rw = 0.0;
    for (const Vec2c& k : k_samples) {
        rz = std::max(rz, std::abs(k.z - zc));
        rw = std::max(rw, std::abs(k.w - wc));
    }
    if (rz == 0.0) rz = 1.0;
    if (rw == 0.0) rw = 1.0;

    std::vector<std::pair<int, int>> basis;
    for (int a = 0; a <= degree; ++a)
        for (int b = 0; a + b <= degree; ++b) basis.push_back({a, b});

    auto eval_poly = [&](const std::vector<cplx>& coeffs, const Vec2c& x) {
        const cplx u = (x.z - zc) / rz, v = (x.w - wc) / rw;
        cplx acc = 0.0;
        for (std::size_t i = 0; i < basis.size(); ++i) {
            cplx term = coeffs[i];
            for (int a = 0; a < basis[i].first; ++a) term *= u;
            for (int b = 0; b < basis[i].second; ++b) term *= v;
            acc += term;
        }
        return acc;
    };

    Rng rng(opts.seed);
    std::vector<double> scores(probes.size(), 0.0);
    for (int trial = 0; trial < opts.poly_count; ++trial) {
        std::vector<cplx> coeffs(basis.size());
        // degree-decaying draws keep near-constant polynomials in the family,
        // which is what makes hull scores approach 1 from below on filled-in
        // probes
        for (std::size_t i = 0; i < basis.size(); ++i)
            coeffs[i] = rng.disc(std::pow(2.0, -double(basis[i].first + basis[i].second)));
        double sup = 0.0;
        for (const Vec2c& k : k_samples) sup = std::max(sup, std::abs(eval_poly(coeffs, k)));
        if (sup == 0.0) continue;
        for (std::size_t i = 0; i < probes.size(); ++i)
            scores[i] = std::max(scores[i], std::abs(eval_poly(coeffs, probes[i])) / sup);
    }
    return scores;
}

}  // namespace holoembed
