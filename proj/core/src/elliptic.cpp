#include "holoembed/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

#include "holoembed/errors.hpp"

namespace holoembed {

namespace {

struct PowerSums {
    cplx e4{}, e6{}, e8{}, e10{};
};

// Box sum of omega^-k over Omega_L \ {0} for k = 4, 6, 8, 10.
PowerSums box_power_sums(const Lattice& lat, int L) {
    PowerSums acc;
    const cplx o1 = lat.omega1(), o2 = lat.omega2();
    for (int n = -L; n <= L; ++n) {
        for (int m = -L; m <= L; ++m) {
            if (n == 0 && m == 0) continue;
            const cplx w = double(n) * o1 + double(m) * o2;
            const cplx w2 = 1.0 / (w * w);
            const cplx w4 = w2 * w2;
            acc.e4 += w4;
            acc.e6 += w4 * w2;
            acc.e8 += w4 * w4;
            acc.e10 += w4 * w4 * w2;
        }
    }
    return acc;
}

// Full Eisenstein sums by two Richardson steps on nested boxes (the box error
// expands in even powers of 1/L).
PowerSums full_power_sums(const Lattice& lat) {
    const int L0 = 200;
    const PowerSums a = box_power_sums(lat, L0);
    const PowerSums b = box_power_sums(lat, 2 * L0);
    const PowerSums c = box_power_sums(lat, 4 * L0);
    auto extrap = [](cplx x, cplx y, cplx z) {
        const cplx r1 = (4.0 * y - x) / 3.0;
        const cplx r2 = (4.0 * z - y) / 3.0;
        return (16.0 * r2 - r1) / 15.0;
    };
    return {extrap(a.e4, b.e4, c.e4), extrap(a.e6, b.e6, c.e6),
            extrap(a.e8, b.e8, c.e8), extrap(a.e10, b.e10, c.e10)};
}

inline cplx reciprocal(cplx d) {
    const double inv = 1.0 / (d.real() * d.real() + d.imag() * d.imag());
    return {d.real() * inv, -d.imag() * inv};
}

void sort_fixed_order(std::vector<cplx>& omegas) {
    // Largest |omega| first: small contributions accumulate last, and the
    // fixed order keeps evaluations bit-reproducible.
    std::sort(omegas.begin(), omegas.end(), [](cplx a, cplx b) {
        const double na = std::norm(a), nb = std::norm(b);
        if (na != nb) return na > nb;
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
}

}  // namespace

WeierstrassP::WeierstrassP(Lattice lattice, int truncation, double pole_margin)
    : lattice_(std::move(lattice)), truncation_(truncation), pole_margin_(pole_margin) {
    if (truncation_ < 1) throw std::invalid_argument("WeierstrassP: truncation must be >= 1");
    if (pole_margin_ < 0.0) pole_margin_ = 1e-3 * lattice_.systole();

    const PowerSums full = full_power_sums(lattice_);
    e4_full_ = full.e4;
    e6_full_ = full.e6;
    e8_full_ = full.e8;
    e10_full_ = full.e10;
    rebuild_box(truncation_);
}

void WeierstrassP::rebuild_box(int n) {
    truncation_ = n;
    const PowerSums box = box_power_sums(lattice_, n);
    s4_ = e4_full_ - box.e4;
    s6_ = e6_full_ - box.e6;
    s8_ = e8_full_ - box.e8;
    s10_ = e10_full_ - box.e10;

    omegas_.clear();
    omegas_.reserve(std::size_t(2 * n + 1) * std::size_t(2 * n + 1) - 1);
    for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j) {
            if (i == 0 && j == 0) continue;
            omegas_.push_back(double(i) * lattice_.omega1() + double(j) * lattice_.omega2());
        }
    sort_fixed_order(omegas_);
    inv_omega_sq_.clear();
    inv_omega_sq_.reserve(omegas_.size());
    for (cplx w : omegas_) inv_omega_sq_.push_back(reciprocal(w * w));
}

WeierstrassP WeierstrassP::with_truncation(int n) const {
    if (n < 1) throw std::invalid_argument("with_truncation: truncation must be >= 1");
    WeierstrassP out = *this;
    out.rebuild_box(n);
    return out;
}

double WeierstrassP::pole_distance(cplx z) const {
    const cplx r = lattice_.reduce(z);
    double best = std::abs(r);
    for (int n = -1; n <= 1; ++n)
        for (int m = -1; m <= 1; ++m) {
            if (n == 0 && m == 0) continue;
            best = std::min(best, std::abs(r - double(n) * lattice_.omega1() -
                                           double(m) * lattice_.omega2()));
        }
    return best;
}

void WeierstrassP::require_clear_of_pole(cplx z_reduced) const {
    double best = std::abs(z_reduced);
    for (int n = -1; n <= 1 && best >= pole_margin_; ++n)
        for (int m = -1; m <= 1; ++m) {
            if (n == 0 && m == 0) continue;
            best = std::min(best, std::abs(z_reduced - double(n) * lattice_.omega1() -
                                           double(m) * lattice_.omega2()));
        }
    if (best < pole_margin_) {
        std::ostringstream os;
        os << "WeierstrassP: evaluation within pole margin (distance " << best << " < "
           << pole_margin_ << ")";
        throw PoleProximityError(os.str());
    }
}

cplx WeierstrassP::sum_pairs(cplx z) const {
    double ar = 0.0, ai = 0.0;
    const double zr = z.real(), zi = z.imag();
    const std::size_t n = omegas_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double dr = zr - omegas_[i].real();
        const double di = zi - omegas_[i].imag();
        const double inv = 1.0 / (dr * dr + di * di);
        const double tr = dr * inv, ti = -di * inv;  // 1/(z-w)
        ar += tr * tr - ti * ti - inv_omega_sq_[i].real();
        ai += 2.0 * tr * ti - inv_omega_sq_[i].imag();
    }
    return {ar, ai};
}

cplx WeierstrassP::sum_deriv_pairs(cplx z) const {
    double ar = 0.0, ai = 0.0;
    const double zr = z.real(), zi = z.imag();
    for (const cplx& w : omegas_) {
        const double dr = zr - w.real();
        const double di = zi - w.imag();
        const double inv = 1.0 / (dr * dr + di * di);
        const double tr = dr * inv, ti = -di * inv;
        const double sr = tr * tr - ti * ti, si = 2.0 * tr * ti;  // (z-w)^-2
        ar += -2.0 * (sr * tr - si * ti);
        ai += -2.0 * (sr * ti + si * tr);
    }
    return {ar, ai};
}

cplx WeierstrassP::tail_correction(cplx z) const {
    const cplx zz = z * z;
    return zz * (3.0 * s4_ + zz * (5.0 * s6_ + zz * (7.0 * s8_ + zz * 9.0 * s10_)));
}

cplx WeierstrassP::tail_correction_deriv(cplx z) const {
    const cplx zz = z * z;
    return z * (6.0 * s4_ + zz * (20.0 * s6_ + zz * (42.0 * s8_ + zz * 72.0 * s10_)));
}

cplx WeierstrassP::eval(cplx z) const {
    const cplx r = lattice_.reduce(z);
    require_clear_of_pole(r);
    return reciprocal(r * r) + sum_pairs(r) + tail_correction(r);
}

cplx WeierstrassP::eval_unguarded(cplx z) const {
    const cplx r = lattice_.reduce(z);
    return reciprocal(r * r) + sum_pairs(r) + tail_correction(r);
}

cplx WeierstrassP::deriv(cplx z) const {
    const cplx r = lattice_.reduce(z);
    require_clear_of_pole(r);
    const cplx ir = reciprocal(r);
    return -2.0 * ir * ir * ir + sum_deriv_pairs(r) + tail_correction_deriv(r);
}

cplx WeierstrassP::deriv_unguarded(cplx z) const {
    const cplx r = lattice_.reduce(z);
    const cplx ir = reciprocal(r);
    return -2.0 * ir * ir * ir + sum_deriv_pairs(r) + tail_correction_deriv(r);
}

cplx WeierstrassP::eval_raw(cplx z) const {
    require_clear_of_pole(z);
    return reciprocal(z * z) + sum_pairs(z);
}

cplx WeierstrassP::tail_eval(cplx z) const {
    if (std::abs(z) >= lattice_.systole())
        throw std::invalid_argument("WeierstrassP::tail_eval: |z| must stay below the systole");
    return sum_pairs(z) + tail_correction(z);
}

EllipticInvariants invariants(const Lattice& lattice, int truncation) {
    if (truncation < 1) throw std::invalid_argument("invariants: truncation must be >= 1");
    const PowerSums full = full_power_sums(lattice);
    return {60.0 * full.e4, 140.0 * full.e6};
}

EllipticInvariants invariants_raw(const Lattice& lattice, int truncation) {
    if (truncation < 1) throw std::invalid_argument("invariants_raw: truncation must be >= 1");
    const PowerSums box = box_power_sums(lattice, truncation);
    return {60.0 * box.e4, 140.0 * box.e6};
}

LaurentTail bound_tail(const WeierstrassP& wp, double r0, std::size_t boundary_samples) {
    if (r0 <= 0.0 || r0 >= 0.5 * wp.lattice().systole())
        throw std::invalid_argument("bound_tail: need 0 < r0 < systole / 2");
    double m = 0.0;
    for (std::size_t i = 0; i < boundary_samples; ++i) {
        const double a = 2.0 * std::numbers::pi * double(i) / double(boundary_samples);
        m = std::max(m, std::abs(wp.tail_eval(r0 * cplx(std::cos(a), std::sin(a)))));
    }
    return {r0, 1.1 * m};
}

int star_condition_k(const WeierstrassP& wp, const LaurentTail& tail, std::size_t radii_checked) {
    const Lattice& lat = wp.lattice();
    std::vector<double> grid_abs;
    std::vector<double> grid_rad;
    const int steps = 64;
    for (int i = 0; i < steps; ++i)
        for (int j = 0; j < steps; ++j) {
            const double s = -0.5 + (double(i) + 0.5) / steps;
            const double t = -0.5 + (double(j) + 0.5) / steps;
            const cplx z = s * lat.omega1() + t * lat.omega2();
            if (wp.pole_distance(z) <= wp.pole_margin()) continue;
            grid_abs.push_back(std::abs(wp.eval(z)));
            grid_rad.push_back(std::abs(lat.reduce(z)));
        }

    auto sup_outside = [&](double r) {
        double sup = 0.0;
        for (std::size_t i = 0; i < grid_abs.size(); ++i)
            if (grid_rad[i] >= r) sup = std::max(sup, grid_abs[i]);
        // the sup lives on the disc rim; sweep it densely
        for (int i = 0; i < 256; ++i) {
            const double a = 2.0 * std::numbers::pi * (double(i) + 0.5) / 256.0;
            sup = std::max(sup, std::abs(wp.eval(r * cplx(std::cos(a), std::sin(a)))));
        }
        return sup;
    };

    std::vector<double> radii, sups;
    for (std::size_t j = 1; j <= radii_checked; ++j) {
        radii.push_back(tail.r0 * std::pow(2.0, -double(j)));
        sups.push_back(sup_outside(radii.back()));
    }

    for (int k = 2; k <= 64; ++k) {
        bool ok = true;
        for (std::size_t i = 0; i < radii.size(); ++i) {
            const double r = radii[i];
            if ((double(k) * double(k) - r * r * tail.M) / (r * r) <= sups[i]) {
                ok = false;
                break;
            }
        }
        if (ok) return k;
    }
    return 64;  // k^2/r^2 dominates long before this cap for any sane lattice
}

// ---------------------------------------------------------------------------
// Preimage solving: argument-principle winding counts on rectangles in
// lattice coordinates, subdivided until each root is isolated, then polished
// by Newton at full truncation.
// ---------------------------------------------------------------------------

namespace {

struct CoordCell {
    double s0, t0, s1, t1;
};

// Strictly interior lattice point (integer coordinate pair), where wp - w has
// its order-2 pole.
bool cell_contains_pole(const CoordCell& c) {
    const double a = std::ceil(c.s0 + 1e-12);
    const double b = std::ceil(c.t0 + 1e-12);
    return a < c.s1 - 1e-12 && b < c.t1 - 1e-12 && a >= c.s0 && b >= c.t0;
}

class WindingCounter {
  public:
    WindingCounter(const WeierstrassP& wp, cplx target) : wp_(wp), target_(target) {}

    cplx value(double s, double t) const {
        const cplx z = s * wp_.lattice().omega1() + t * wp_.lattice().omega2();
        return wp_.eval_unguarded(z) - target_;
    }

    // Zeros minus poles inside the cell; sets `unresolved` when the boundary
    // passes too close to a zero for the phase to be tracked.
    int count(const CoordCell& c, bool& unresolved) {
        unresolved_ = false;
        const double sx[5] = {c.s0, c.s1, c.s1, c.s0, c.s0};
        const double tx[5] = {c.t0, c.t0, c.t1, c.t1, c.t0};
        double total = 0.0;
        cplx fa = value(sx[0], tx[0]);
        for (int e = 0; e < 4 && !unresolved_; ++e) {
            const int pre = 8;
            double sa = sx[e], ta = tx[e];
            for (int i = 1; i <= pre; ++i) {
                const double u = double(i) / pre;
                const double sb = sx[e] + u * (sx[e + 1] - sx[e]);
                const double tb = tx[e] + u * (tx[e + 1] - tx[e]);
                const cplx fb = value(sb, tb);
                total += track(sa, ta, sb, tb, fa, fb, 26);
                sa = sb;
                ta = tb;
                fa = fb;
                if (unresolved_) break;
            }
        }
        const double turns = total / (2.0 * std::numbers::pi);
        if (std::abs(turns - std::round(turns)) > 0.25) unresolved_ = true;
        unresolved = unresolved_;
        return static_cast<int>(std::lround(turns));
    }

  private:
    double track(double sa, double ta, double sb, double tb, cplx fa, cplx fb, int depth) {
        if (std::abs(fa) == 0.0 || std::abs(fb) == 0.0) {
            unresolved_ = true;
            return 0.0;
        }
        const double darg = std::arg(fb / fa);
        if (std::abs(darg) <= 1.5) return darg;
        if (depth == 0) {
            unresolved_ = true;
            return darg;
        }
        const double sm = 0.5 * (sa + sb), tm = 0.5 * (ta + tb);
        const cplx fm = value(sm, tm);
        return track(sa, ta, sm, tm, fa, fm, depth - 1) +
               track(sm, tm, sb, tb, fm, fb, depth - 1);
    }

    const WeierstrassP& wp_;
    cplx target_;
    bool unresolved_ = false;
};

}  // namespace

std::vector<WpPreimage> wp_preimages(const WeierstrassP& wp, cplx w, double tol) {
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
        throw std::invalid_argument("wp_preimages: target must be finite");
    if (tol <= 0.0) throw std::invalid_argument("wp_preimages: tol must be positive");
    const Lattice& lat = wp.lattice();
    const WeierstrassP search = wp.truncation() > 16 ? wp.with_truncation(16) : wp;
    WindingCounter counter(search, w);

    auto to_z = [&](double s, double t) { return s * lat.omega1() + t * lat.omega2(); };
    const double residual_scale = 1.0 + std::abs(w);

    // A cell whose boundary grazes a zero gets counted again with its seams
    // shifted by ~1e-6 in lattice coordinates.
    auto robust_count = [&](CoordCell c, bool& unresolved) {
        for (int jitter = 0; jitter < 6; ++jitter) {
            int k = counter.count(c, unresolved);
            if (!unresolved) {
                if (cell_contains_pole(c)) k += 2;
                return k;
            }
            const double eps = 1.3e-6 * double(jitter + 1);
            c = CoordCell{c.s0 - eps, c.t0 - 0.7 * eps, c.s1 + eps, c.t1 + 0.7 * eps};
        }
        return 0;
    };

    auto newton_simple = [&](cplx z0, double reach) -> std::pair<bool, cplx> {
        const cplx jitters[5] = {{0.0, 0.0}, {0.31, 0.13}, {-0.22, 0.27}, {0.17, -0.33}, {-0.29, -0.11}};
        for (const cplx j : jitters) {
            cplx z = z0 + reach * j;
            bool diverged = false;
            for (int it = 0; it < 60; ++it) {
                const cplx f = wp.eval_unguarded(z) - w;
                if (std::abs(f) <= tol * residual_scale) return {true, z};
                const cplx fp = wp.deriv_unguarded(z);
                if (std::abs(fp) == 0.0 || std::abs(z - z0) > 8.0 * reach + 0.1) {
                    diverged = true;
                    break;
                }
                z -= f / fp;
            }
            (void)diverged;
        }
        return {false, z0};
    };

    // Critical-point refinement for a double zero: Newton on wp' with
    // wp'' = 6 wp^2 - g2/2.
    auto newton_double = [&](cplx z0) -> std::pair<bool, cplx> {
        cplx z = z0;
        for (int it = 0; it < 60; ++it) {
            const cplx fp = wp.deriv_unguarded(z);
            const cplx p = wp.eval_unguarded(z);
            if (std::abs(p - w) <= tol * residual_scale && std::abs(fp) <= 1e-5 * residual_scale)
                return {true, z};
            const cplx fpp = 6.0 * p * p - 0.5 * wp.g2();
            if (std::abs(fpp) == 0.0) break;
            z -= fp / fpp;
        }
        return {false, z0};
    };

    std::string last_failure = "no attempt ran";
    for (int attempt = 0; attempt < 8; ++attempt) {
        const double off = 1.7e-4 * double(attempt * attempt + attempt);
        const double os = 0.0131 + off, ot = 0.0077 + 0.7 * off;

        struct Pending {
            CoordCell cell;
            int zeros;
        };
        std::deque<Pending> queue;
        bool failed = false;

        const int n0 = 5;
        int found_total = 0;
        for (int i = 0; i < n0 && !failed; ++i)
            for (int j = 0; j < n0; ++j) {
                CoordCell c{-0.5 + os + double(i) / n0, -0.5 + ot + double(j) / n0,
                            -0.5 + os + double(i + 1) / n0, -0.5 + ot + double(j + 1) / n0};
                bool unresolved = false;
                const int k = robust_count(c, unresolved);
                if (unresolved) {
                    failed = true;
                    last_failure = "unresolved initial cell";
                    break;
                }
                if (k < 0) {
                    failed = true;
                    last_failure = "negative zero count in a cell";
                    break;
                }
                if (k > 0) {
                    queue.push_back({c, k});
                    found_total += k;
                }
            }
        if (!failed && found_total != 2) {
            failed = true;
            last_failure =
                "initial cells hold " + std::to_string(found_total) + " zeros, expected 2";
        }

        std::vector<WpPreimage> found;
        auto add_root = [&](cplx z, int mult) {
            const TorusPoint pt(z, lat);
            for (auto& m : found)
                if (m.point.equivalent(pt, 1e-5)) {
                    m.multiplicity += mult;
                    return;
                }
            found.push_back({pt, mult});
        };

        std::size_t steps = 0;
        while (!failed && !queue.empty()) {
            if (++steps > 4000) {
                failed = true;
                last_failure = "subdivision budget exhausted";
                break;
            }
            Pending p = queue.front();
            queue.pop_front();
            const double size = std::max(p.cell.s1 - p.cell.s0, p.cell.t1 - p.cell.t0);
            const double reach = size * std::max(std::abs(lat.omega1()), std::abs(lat.omega2()));
            const cplx center =
                to_z(0.5 * (p.cell.s0 + p.cell.s1), 0.5 * (p.cell.t0 + p.cell.t1));

            if (p.zeros == 1 && size < 1e-3) {
                auto [ok, z] = newton_simple(center, reach);
                if (!ok) {
                    failed = true;
                    last_failure = "Newton polish stalled on a simple zero";
                    break;
                }
                add_root(z, 1);
                continue;
            }
            if (p.zeros == 2 && size < 1e-3) {
                // Either a genuine double point or a +/- pair that collapsed
                // into one cell; wp(-z) = wp(z) supplies the partner.
                if (auto [ok, z] = newton_double(center); ok) {
                    add_root(z, 2);
                    continue;
                }
                auto [ok, z] = newton_simple(center, reach);
                if (!ok) {
                    failed = true;
                    last_failure = "Newton polish stalled on a clustered pair";
                    break;
                }
                add_root(z, 1);
                add_root(-z, 1);
                continue;
            }

            const double sm = 0.5 * (p.cell.s0 + p.cell.s1);
            const double tm = 0.5 * (p.cell.t0 + p.cell.t1);
            const CoordCell quads[4] = {{p.cell.s0, p.cell.t0, sm, tm},
                                        {sm, p.cell.t0, p.cell.s1, tm},
                                        {p.cell.s0, tm, sm, p.cell.t1},
                                        {sm, tm, p.cell.s1, p.cell.t1}};
            int got = 0;
            std::vector<Pending> children;
            bool child_failed = false;
            for (const CoordCell& q : quads) {
                bool unresolved = false;
                const int k = robust_count(q, unresolved);
                if (unresolved || k < 0) {
                    child_failed = true;
                    break;
                }
                if (k > 0) children.push_back({q, k});
                got += k;
            }
            if (child_failed || got != p.zeros) {
                // seams through a zero: polish directly from this cell
                if (p.zeros <= 2 && size < 0.05) {
                    if (p.zeros == 2) {
                        if (auto [ok, z] = newton_double(center); ok) {
                            add_root(z, 2);
                            continue;
                        }
                    }
                    auto [ok, z] = newton_simple(center, reach);
                    if (ok) {
                        add_root(z, 1);
                        if (p.zeros == 2) add_root(-z, 1);
                        continue;
                    }
                }
                failed = true;
                last_failure = child_failed ? "unresolved cell during subdivision"
                                            : "child zero counts disagree with parent";
                break;
            }
            for (auto& ch : children) queue.push_back(ch);
        }
        if (failed) continue;

        int total = 0;
        for (const auto& m : found) total += m.multiplicity;
        if (total != 2) {
            last_failure = "polished multiplicities sum to " + std::to_string(total);
            continue;
        }
        // final residual check at full truncation
        bool resid_ok = true;
        for (const auto& m : found)
            if (std::abs(wp.eval_unguarded(m.point.rep()) - w) > 1e3 * tol * residual_scale)
                resid_ok = false;
        if (!resid_ok) {
            last_failure = "final residual check failed";
            continue;
        }
        return found;
    }
    throw NonConvergenceError("wp_preimages: refinement stalled (" + last_failure + ")");
}

}  // namespace holoembed
