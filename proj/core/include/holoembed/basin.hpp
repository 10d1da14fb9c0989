#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "holoembed/holomap.hpp"
#include "holoembed/report.hpp"

namespace holoembed {

/// The halving automorphism A(z, w) = (z/2, w/2) that anchors the induction.
HoloMap halving_map();

/// Ordered automorphism sequence F_1, F_2, ... with lazily materialized
/// prefix compositions F(j) = F_j o ... o F_1. Entries must be invertible
/// (no rational-shear leaves).
class AutoSequence {
  public:
    AutoSequence() = default;
    explicit AutoSequence(std::vector<HoloMap> maps);

    void push_back(HoloMap f);
    std::size_t size() const { return maps_.size(); }
    const HoloMap& map(std::size_t i) const { return maps_.at(i); }  // F_{i+1}

    /// F(j); prefix(0) is the identity.
    const HoloMap& prefix(std::size_t j) const;

    Vec2c apply_prefix(std::size_t j, const Vec2c& x) const;

    /// Constant sequence F_i = f of the given length.
    static AutoSequence constant(const HoloMap& f, std::size_t length);

  private:
    std::vector<HoloMap> maps_;
    mutable std::vector<HoloMap> prefixes_;  // prefixes_[j] = F(j); [0] = id
};

struct BasinQuery {
    std::size_t max_iterations = 256;
    double convergence_radius = 0.5;
    double escape_radius = 1e6;
};

struct BasinVerdict {
    enum class Kind { converged, escaped, undecided };
    Kind kind = Kind::undecided;
    std::size_t step = 0;
    double rate = 0.0;  // geometric mean of the last 5 contraction ratios
};

/// Orbit classification under the sequence: converged once the orbit sits
/// inside the convergence radius and contracts five times in a row, escaped
/// past the escape radius, otherwise undecided.
BasinVerdict basin_membership(const AutoSequence& seq, const Vec2c& x, const BasinQuery& q);

struct StarCheck {
    bool pass = false;
    double worst_margin = 0.0;  // delta minus the worst deviation from A
    Vec2c witness{};
};

/// The (*) bound: ||sigma(x) - A(x)|| < delta over the supplied unit-ball
/// samples.
StarCheck check_star(const HoloMap& sigma, double delta, std::span<const Vec2c> ball_samples);

/// Deterministic unit-ball sample cloud (shared by the induction machinery).
std::vector<Vec2c> ball_samples(double radius, std::size_t count, std::uint64_t seed);

struct PusherRequest {
    std::vector<Vec2c> k_samples;  // to be moved by less than epsilon
    std::vector<Vec2c> v_samples;  // to be expelled past the target radius
    double target_radius = 0.0;    // R
    double epsilon = 0.0;
    std::optional<Vec2c> fixed_point;
};

struct PusherResult {
    HoloMap map;
    double k_displacement = 0.0;  // sup ||phi(x) - x|| over K samples
    double expulsion_floor = 0.0; // min ||phi(v)|| over V samples
    int degree = 0;
};

using Pusher = std::function<PusherResult(const PusherRequest&)>;

struct ModelPusherOptions {
    int max_degree = 64;
};

/// Condition-1 oracle for the model scenario of a single pi1-proper curve:
/// a polynomial shear (z, w) -> (z, w + g(z)) fit by least squares to stay
/// below epsilon/2 on pi1(K) while exceeding 2R + |w| along the curve
/// samples, escalating the degree until the margins hold on the request's
/// own samples. The optional fixed point is enforced by subtracting the
/// compensation constant g(pi1(p)).
PusherResult model_pusher(const PusherRequest& req, const ModelPusherOptions& opts = {});

struct InductionOptions {
    double delta = 0.05;       // the (*) tolerance (config input, not derived)
    double epsilon0 = 1e-2;    // eps_j = epsilon0 * 2^-j
    std::size_t ball_sample_count = 512;
    std::uint64_t seed = 97;
};

/// Running state of the basin induction. Hypotheses (b) and (c) hold on
/// the tracked samples after every accepted step.
struct InductionState {
    std::size_t step = 0;          // j
    AutoSequence sequence;         // F_1 ... F_j
    std::vector<Vec2c> k_samples;  // K_j in original coordinates
    std::vector<Vec2c> v_samples;  // V in original coordinates
    std::vector<Vec2c> k_images;   // F(j)(K_j)
    std::vector<Vec2c> v_images;   // F(j)(V)
    double margin_b = 0.0;         // 1 - max ||F(j) K_j||
    double margin_c = 0.0;         // min ||F(j) V|| - 1
    InductionOptions options;
};

/// I_1 with F_1 = A. Requires ||A v|| > 1 on the V samples.
InductionState fb_induction_start(std::vector<Vec2c> k1, std::vector<Vec2c> v,
                                  const InductionOptions& opts = {});

/// One induction step: K = ball samples plus F(j)(K_next), s chosen so the
/// contraction sends the pushed set inside the half ball, F_{j+1} = A^s o phi.
/// Verifies the pusher margins, the (*) bound on every new factor, and the
/// advanced hypotheses (b), (c). Throws SearchExhaustedError on shortfall.
InductionState fb_induction_step(const InductionState& state, std::vector<Vec2c> k_next,
                                 const Pusher& pusher);

/// Sequence files: {"maps": [<map>, ...]} in application order.
std::string auto_sequence_to_json(const AutoSequence& seq);
AutoSequence auto_sequence_from_json(const std::string& text);

struct HullOptions {
    int poly_count = 256;
    std::uint64_t seed = 4242;
};

/// Monte-Carlo polynomial-hull score per probe: the max over random degree-d
/// polynomials, sup-normalized on the K samples, of |p(probe)|. Scores near 1
/// flag "possibly in the hull"; this is a heuristic proxy, never a
/// certification.
std::vector<double> hull_estimate(std::span<const Vec2c> k_samples,
                                  std::span<const Vec2c> probes, int degree,
                                  const HullOptions& opts = {});

}  // namespace holoembed
