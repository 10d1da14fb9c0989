#pragma once

#include <array>

#include "holoembed/curve.hpp"
#include "holoembed/elliptic.hpp"
#include "holoembed/report.hpp"
#include "holoembed/surface.hpp"

namespace holoembed {

enum class EmbeddingKind { generic, degenerate };

/// The torus embeddings psi: T \ {p, q} -> C^2 built from translated
/// Weierstrass functions. Generic pairs use (f_p, g_q); pairs with
/// 2(p - q) in X use the repaired second component 1/(g_x0 - alpha).
class EmbeddingMap {
  public:
    EmbeddingKind kind() const { return kind_; }
    cplx p() const { return p_; }
    cplx q() const { return q_; }
    cplx x0() const { return x0_; }
    cplx alpha() const { return alpha_; }
    const WeierstrassP& wp() const { return *wp_; }

    Vec2c eval(cplx z) const;

    /// psi composed with a planar circle, as a resampleable space curve.
    ParamCurve image_of(const CircleCurve& circle) const;

    /// Ramification sets of the two component functions (translates of the
    /// four half-periods).
    std::array<cplx, 4> first_ramification() const;
    std::array<cplx, 4> second_ramification() const;

    /// Parameter-level JSON for pipeline reuse (the evaluator is supplied on
    /// load).
    std::string to_json() const;
    static EmbeddingMap from_json(const WeierstrassP& wp, const std::string& text);

  private:
    friend EmbeddingMap build_embedding(const WeierstrassP&, const TorusSurface&, cplx, cplx);
    friend EmbeddingMap build_embedding_degenerate(const WeierstrassP&, const TorusSurface&,
                                                   cplx, cplx);
    EmbeddingKind kind_;
    cplx p_, q_, x0_, alpha_;
    const WeierstrassP* wp_;
};

/// Generic embedding; requires 2(p - q) outside X, else throws
/// DegeneratePairError pointing at the degenerate builder.
EmbeddingMap build_embedding(const WeierstrassP& wp, const TorusSurface& surface, cplx p, cplx q);

/// Degenerate repair for 2(p - q) in X, p != q: x0 = p + (q - p)/2 and second
/// component 1/(g_x0 - alpha) with alpha = wp(p - x0).
EmbeddingMap build_embedding_degenerate(const WeierstrassP& wp, const TorusSurface& surface,
                                        cplx p, cplx q);

struct InjectivityOptions {
    double min_separation = 1e-6;  // required pairwise image distance
};

/// Pairwise distinctness of psi over the grid. Failure is a report outcome,
/// not an exception; the worst pair is always recorded.
VerificationReport verify_injectivity(const EmbeddingMap& psi, const SampleGrid& grid,
                                      const InjectivityOptions& opts = {});

struct PqOptions {
    double approach_angle = 0.3;     // where on bd D1 the pole approaches
    double norm_gap_factor = 2.0;    // N > factor * ||f_p|| on bd D2
    double product_gap_factor = 2.0; // |g_q(x0) f_p(x0)| > factor * M N
    std::size_t boundary_samples = 1024;
    int max_halvings = 40;
};

struct PqChoice {
    cplx p, q, x0;
    double norm_on_bd1 = 0.0;       // N
    double g_bound = 0.0;           // M
    double product_at_x0 = 0.0;     // |g_q(x0)| |f_p(x0)|
    double max_product_margin = 0.0;  // bd2 max of |f_p g_q| over bd1 max
    VerificationReport report;
};

/// The two-disc placement: p approaches bd D1 until its norm dominates, q
/// approaches x0 on bd D2 until the product inequality holds, making
/// |f_p g_q| peak on bd D2. Throws SearchExhaustedError with the failing
/// inequality.
PqChoice choose_pq_for_discs(const WeierstrassP& wp, const TorusSurface& surface,
                             const PqOptions& opts = {});

struct PunctureOptions {
    double r0 = -1.0;               // Laurent disc radius; default systole * 0.4
    std::size_t boundary_samples = 4096;
    int max_r_halvings = 24;
    double exclusion_arc = -1.0;    // uniqueness neighborhood; default 0.1 * radius
};

struct PunctureChoice {
    cplx p_delta;       // pole placement z0 + i delta (in disc coordinates)
    cplx x_star;        // boundary maximizer of |f_p_delta|
    int k = 0;          // star-condition constant
    double r = 0.0;     // accepted disc radius
    double delta = 0.0; // r / k
    double max_gap = 0.0;
    VerificationReport report;
};

/// The disc + point construction: places p_delta above the bottom boundary
/// point z0 so that |f_p_delta| takes a unique sampled maximum on bd D1 whose
/// value has no other boundary preimage. Disc index 0 of the surface must be
/// a disc; reports carry the graph-slope, half-plane and star margins.
PunctureChoice puncture_max_locator(const WeierstrassP& wp, const TorusSurface& surface,
                                    const PunctureOptions& opts = {});

}  // namespace holoembed
