#pragma once

#include <cmath>

namespace plume {

/// 2D point/vector on the periodic unit square.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }

    Vec2 normalized() const {
        const double n = norm();
        return {x / n, y / n};
    }

    bool operator==(const Vec2&) const = default;
};

inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }

/// Wrap a coordinate into [0, 1).
inline double wrap_unit(double a) {
    a -= std::floor(a);
    // floor(-1e-17) == -1 puts a exactly at 1.0; fold it back
    if (a >= 1.0) a -= 1.0;
    return a;
}

inline Vec2 wrap_unit(Vec2 p) { return {wrap_unit(p.x), wrap_unit(p.y)}; }

/// Minimum-image separation component on the unit torus, in [-0.5, 0.5].
inline double wrap_delta(double d) { return d - std::nearbyint(d); }

/// Minimum-image offset b - a on the unit torus.
inline Vec2 wrap_delta(Vec2 a, Vec2 b) {
    return {wrap_delta(b.x - a.x), wrap_delta(b.y - a.y)};
}

/// Periodic (minimum-image) distance between two points of the unit torus.
inline double wrap_distance(Vec2 a, Vec2 b) { return wrap_delta(a, b).norm(); }

/// sin(pi*x) with exact zeros at integer x and exact 1 at half-integers.
/// Plain std::sin(M_PI*x) leaves O(1e-16) residue at x=1 which matters for
/// quantities that must vanish identically there.
inline double sin_pi(double x) {
    double r = x - std::floor(x);  // [0, 1)
    if (r > 0.5) r = 1.0 - r;      // exact (Sterbenz)
    return std::sin(M_PI * r);
}

}  // namespace plume
