#pragma once

#include <array>
#include <utility>

#include "holoembed/complex2.hpp"

namespace holoembed {

/// Period lattice X = Z*omega1 + Z*omega2 with Im(omega2/omega1) != 0.
///
/// Reduction maps a point of C to the centered fundamental parallelogram
/// {s*omega1 + t*omega2 : s, t in [-1/2, 1/2)}, which keeps reduced points as
/// far from the pole at 0 as a parallelogram cell allows.
class Lattice {
  public:
    Lattice(cplx omega1, cplx omega2);

    cplx omega1() const { return omega1_; }
    cplx omega2() const { return omega2_; }

    /// Coefficients (s, t) with z = s*omega1 + t*omega2, via the 2x2 real system.
    std::pair<double, double> coords(cplx z) const;

    /// Representative with lattice coordinates in [-1/2, 1/2). Idempotent.
    cplx reduce(cplx z) const;

    /// True iff reduce(z) has lattice coordinates within tol of (0, 0).
    bool is_lattice_point(cplx z, double tol = 1e-9) const;

    /// Torus distance |reduce(a - b)|.
    double torus_dist(cplx a, cplx b) const { return std::abs(reduce(a - b)); }

    /// Length of the shortest nonzero lattice vector.
    double systole() const { return systole_; }

    /// Condition number of the real basis matrix [Re/Im omega1, omega2].
    double condition_number() const { return condition_; }

    /// Set when |Im(omega2/omega1)| < 1e-6 at construction.
    bool ill_conditioned() const { return ill_conditioned_; }

  private:
    cplx omega1_, omega2_;
    double inv_det_;  // 1 / Im(conj(omega1) * omega2)
    double systole_;
    double condition_;
    bool ill_conditioned_;
};

/// A point of the torus C/X, stored by its reduced representative.
class TorusPoint {
  public:
    TorusPoint(cplx rep, const Lattice& lattice)
        : rep_(lattice.reduce(rep)), lattice_(lattice) {}

    cplx rep() const { return rep_; }
    const Lattice& lattice() const { return lattice_; }

    bool equivalent(const TorusPoint& other, double tol = 1e-9) const {
        return lattice_.is_lattice_point(rep_ - other.rep_, tol);
    }

  private:
    cplx rep_;
    Lattice lattice_;
};

/// The four ramification points of the Weierstrass function:
/// 0, omega1/2, omega2/2 and (omega1+omega2)/2, reduced.
std::array<TorusPoint, 4> ramification_points(const Lattice& lattice);

}  // namespace holoembed
