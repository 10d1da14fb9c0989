#include "holoembed/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace holoembed {

namespace {

double shortest_vector(cplx o1, cplx o2) {
    // Gauss reduction so a small enumeration window suffices even for a
    // skewed input basis.
    if (std::abs(o1) < std::abs(o2)) std::swap(o1, o2);
    for (int iter = 0; iter < 64 && std::abs(o2) > 0.0; ++iter) {
        const double mu = (o1.real() * o2.real() + o1.imag() * o2.imag()) / std::norm(o2);
        o1 -= std::round(mu) * o2;
        if (std::abs(o1) >= std::abs(o2)) break;
        std::swap(o1, o2);
    }
    double best = std::abs(o2);
    for (int n = -2; n <= 2; ++n)
        for (int m = -2; m <= 2; ++m) {
            if (n == 0 && m == 0) continue;
            best = std::min(best, std::abs(double(n) * o1 + double(m) * o2));
        }
    return best;
}

}  // namespace

Lattice::Lattice(cplx omega1, cplx omega2) : omega1_(omega1), omega2_(omega2) {
    const double det = omega1.real() * omega2.imag() - omega1.imag() * omega2.real();
    if (!std::isfinite(det) || det == 0.0 || std::abs(omega1) == 0.0 || std::abs(omega2) == 0.0)
        throw std::invalid_argument("Lattice: omega1, omega2 must be R-linearly independent");
    inv_det_ = 1.0 / det;
    ill_conditioned_ = std::abs(std::imag(omega2 / omega1)) < 1e-6;

    // Condition number of [[Re o1, Re o2], [Im o1, Im o2]] from its singular values.
    const double a = omega1.real(), b = omega2.real(), c = omega1.imag(), d = omega2.imag();
    const double f = a * a + b * b + c * c + d * d;
    const double g = std::sqrt(std::max(0.0, f * f - 4.0 * det * det));
    const double smax = std::sqrt((f + g) / 2.0);
    const double smin = std::sqrt(std::max(0.0, (f - g) / 2.0));
    condition_ = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();

    systole_ = shortest_vector(omega1, omega2);
}

std::pair<double, double> Lattice::coords(cplx z) const {
    const double s = (z.real() * omega2_.imag() - z.imag() * omega2_.real()) * inv_det_;
    const double t = (z.imag() * omega1_.real() - z.real() * omega1_.imag()) * inv_det_;
    return {s, t};
}

cplx Lattice::reduce(cplx z) const {
    auto [s, t] = coords(z);
    const double ns = std::floor(s + 0.5);
    const double nt = std::floor(t + 0.5);
    if (ns == 0.0 && nt == 0.0) return z;  // keeps reduce exactly idempotent
    return z - ns * omega1_ - nt * omega2_;
}

bool Lattice::is_lattice_point(cplx z, double tol) const {
    auto [s, t] = coords(z);
    const double ds = s - std::round(s);
    const double dt = t - std::round(t);
    return std::max(std::abs(ds), std::abs(dt)) <= tol;
}

std::array<TorusPoint, 4> ramification_points(const Lattice& lattice) {
    const cplx o1 = lattice.omega1(), o2 = lattice.omega2();
    return {TorusPoint(0.0, lattice), TorusPoint(0.5 * o1, lattice),
            TorusPoint(0.5 * o2, lattice), TorusPoint(0.5 * (o1 + o2), lattice)};
}

}  // namespace holoembed
