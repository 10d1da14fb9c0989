#pragma once

#include <vector>

#include "holoembed/lattice.hpp"

namespace holoembed {

/// g2 = 60 * sum' omega^-4, g3 = 140 * sum' omega^-6. Standard invariants,
/// used here as an independent numerical oracle for the evaluator.
struct EllipticInvariants {
    cplx g2;
    cplx g3;

    cplx discriminant() const { return g2 * g2 * g2 - 27.0 * g3 * g3; }
};

/// Sup bound of the regular part f = wp(z) - 1/z^2 on the closed disc of
/// radius r0.
struct LaurentTail {
    double r0;
    double M;
};

struct WpPreimage {
    TorusPoint point;
    int multiplicity;
};

/// Numerical Weierstrass wp-function for a fixed lattice.
///
/// Values combine the truncated lattice sum over Omega_N = {n omega1 + m omega2,
/// |n|,|m| <= N} with a tail completion built from the exterior power sums
/// S_k = sum_{omega outside Omega_N} omega^-k (themselves pinned by Richardson
/// extrapolation of nested box sums). The completion restores the quadratically
/// convergent raw series to near machine accuracy, so doubling N moves values
/// by less than 1e-8 relative; eval_raw exposes the bare Omega_N sum, whose
/// truncation error behaves like O(|z| N^-2).
class WeierstrassP {
  public:
    explicit WeierstrassP(Lattice lattice, int truncation = 60, double pole_margin = -1.0);

    const Lattice& lattice() const { return lattice_; }
    int truncation() const { return truncation_; }
    double pole_margin() const { return pole_margin_; }

    /// wp(z). Reduces z first; refuses points within the pole margin of X.
    cplx eval(cplx z) const;

    /// wp'(z) = -2 sum 1/(z-omega)^3, same reduction and guards.
    cplx deriv(cplx z) const;

    /// The bare truncated series at z, with no reduction and no tail
    /// completion. Periodicity and N-dependence of this value measure the
    /// documented truncation error.
    cplx eval_raw(cplx z) const;

    /// wp(z) - 1/z^2, stable arbitrarily close to the pole at 0.
    /// Requires |z| below the systole so 0 is the nearest lattice point.
    cplx tail_eval(cplx z) const;

    /// Reduction-only variants without the pole-margin guard, for root
    /// finding and contour sweeps that manage pole proximity themselves.
    cplx eval_unguarded(cplx z) const;
    cplx deriv_unguarded(cplx z) const;

    /// Same lattice and tail data, different truncation order.
    WeierstrassP with_truncation(int n) const;

    /// Distance from reduce(z) to the nearest lattice point.
    double pole_distance(cplx z) const;

    /// Invariants from the tail-completed Eisenstein sums held by this object.
    cplx g2() const { return 60.0 * e4_full_; }
    cplx g3() const { return 140.0 * e6_full_; }

  private:
    void rebuild_box(int n);

    cplx sum_pairs(cplx z) const;        // sum over Omega_N \ {0} of 1/(z-w)^2 - 1/w^2
    cplx sum_deriv_pairs(cplx z) const;  // sum over Omega_N \ {0} of -2/(z-w)^3
    cplx tail_correction(cplx z) const;
    cplx tail_correction_deriv(cplx z) const;
    void require_clear_of_pole(cplx z_reduced) const;

    Lattice lattice_;
    int truncation_;
    double pole_margin_;
    std::vector<cplx> omegas_;          // Omega_N \ {0}, fixed summation order
    std::vector<cplx> inv_omega_sq_;
    cplx e4_full_, e6_full_, e8_full_, e10_full_;  // full Eisenstein sums
    cplx s4_, s6_, s8_, s10_;                      // exterior sums for this N
};

/// Tail-completed Eisenstein invariants (g2, g3) for the lattice.
EllipticInvariants invariants(const Lattice& lattice, int truncation = 60);

/// Bare truncated Eisenstein sums over Omega_N \ {0}.
EllipticInvariants invariants_raw(const Lattice& lattice, int truncation);

/// M = 1.1 * max |wp(z) - 1/z^2| over a dense sample of |z| = r0 (the maximum
/// principle puts the sup on the boundary). Requires r0 < systole / 2.
LaurentTail bound_tail(const WeierstrassP& wp, double r0, std::size_t boundary_samples = 1024);

/// Smallest k >= 2 such that (k^2 - r^2 M) / r^2 exceeds the sampled sup of
/// |wp| over T minus the r-disc, for a decreasing sequence of radii r < r0.
int star_condition_k(const WeierstrassP& wp, const LaurentTail& tail,
                     std::size_t radii_checked = 8);

/// All solutions of wp(z) = w in the fundamental domain with multiplicities
/// (argument-principle cell subdivision, Newton-polished). Multiplicities sum
/// to exactly 2.
std::vector<WpPreimage> wp_preimages(const WeierstrassP& wp, cplx w, double tol = 1e-9);

}  // namespace holoembed
