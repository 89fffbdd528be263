#pragma once

#include <cmath>
#include <complex>

namespace flatspec {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }

/// Angle wrapped into [0, 2*pi).
inline double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    return a;
}

/// Fractional part wrapped into [0, 1).
inline double wrap_unit(double t) {
    t = std::fmod(t, 1.0);
    if (t < 0) t += 1.0;
    return t;
}

/// Distance to the nearest integer.
inline double dist_to_int(double t) {
    return std::fabs(t - std::round(t));
}

/// Orientation-preserving planar rigid motion p -> R(rotation) p + translation.
struct Isometry {
    double rotation = 0.0;  // radians
    Vec2 translation;

    Vec2 apply(const Vec2& p) const {
        const double c = std::cos(rotation), s = std::sin(rotation);
        return {c * p.x - s * p.y + translation.x, s * p.x + c * p.y + translation.y};
    }
    Vec2 apply_dir(const Vec2& d) const {
        const double c = std::cos(rotation), s = std::sin(rotation);
        return {c * d.x - s * d.y, s * d.x + c * d.y};
    }
    Isometry compose(const Isometry& inner) const {
        // (*this) o inner
        Isometry out;
        out.rotation = rotation + inner.rotation;
        out.translation = apply(inner.translation);
        return out;
    }
    Isometry inverse() const {
        Isometry out;
        out.rotation = -rotation;
        const double c = std::cos(rotation), s = std::sin(rotation);
        out.translation = {-(c * translation.x + s * translation.y),
                           -(-s * translation.x + c * translation.y)};
        return out;
    }
};

}  // namespace flatspec
