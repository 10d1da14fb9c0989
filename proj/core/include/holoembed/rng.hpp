#pragma once

#include <cstdint>
#include <random>

#include "holoembed/complex2.hpp"

namespace holoembed {

/// Deterministic RNG. All draws are derived from raw mt19937_64 output so the
/// stream is identical across standard libraries (std distributions are not).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Uniform on the closed disc of the given radius.
    cplx disc(double radius) {
        for (;;) {
            const double x = uniform(-1.0, 1.0);
            const double y = uniform(-1.0, 1.0);
            if (x * x + y * y <= 1.0) return radius * cplx(x, y);
        }
    }

    /// Uniform on the complex square [-a, a]^2.
    cplx box(double a) { return {uniform(-a, a), uniform(-a, a)}; }

    /// Uniform in the euclidean ball of C^2 with the given radius.
    Vec2c ball2(double radius) {
        for (;;) {
            Vec2c x{box(1.0), box(1.0)};
            if (std::norm(x.z) + std::norm(x.w) <= 1.0) return radius * x;
        }
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace holoembed
