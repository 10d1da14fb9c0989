#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace holoembed {

using cplx = std::complex<double>;

/// A point of C^2, written (z, w) throughout.
struct Vec2c {
    cplx z{};
    cplx w{};

    friend Vec2c operator+(const Vec2c& a, const Vec2c& b) { return {a.z + b.z, a.w + b.w}; }
    friend Vec2c operator-(const Vec2c& a, const Vec2c& b) { return {a.z - b.z, a.w - b.w}; }
    friend Vec2c operator*(double s, const Vec2c& a) { return {s * a.z, s * a.w}; }
    friend bool operator==(const Vec2c& a, const Vec2c& b) { return a.z == b.z && a.w == b.w; }
};

/// Euclidean norm on C^2 = R^4.
inline double norm2(const Vec2c& x) {
    return std::sqrt(std::norm(x.z) + std::norm(x.w));
}

inline double dist2(const Vec2c& a, const Vec2c& b) { return norm2(a - b); }

/// Horner evaluation of a polynomial with complex coefficients, lowest degree first.
inline cplx polyval(const std::vector<cplx>& coeffs, cplx x) {
    cplx acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

}  // namespace holoembed
