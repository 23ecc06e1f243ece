#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace pftrail {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }

    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
    bool operator==(const Vec2&) const = default;
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
};

struct BBox2 {
    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

    bool empty() const { return lo.x > hi.x; }
    void expand(const Vec2& p) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    void inflate(double m) {
        lo.x -= m;
        lo.y -= m;
        hi.x += m;
        hi.y += m;
    }
    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    Vec2 center() const { return {(lo.x + hi.x) * 0.5, (lo.y + hi.y) * 0.5}; }
};

// Orientation-preserving or -reversing similarity of the plane.
// Applies as: translation + scale * R(rotation) * M(p), where M mirrors
// across the x axis when `mirrored` is set and is the identity otherwise.
struct Similarity {
    double scale = 1.0;
    double rotation = 0.0;  // radians
    bool mirrored = false;
    Vec2 translation{};

    Vec2 apply(const Vec2& p) const {
        double px = p.x;
        double py = mirrored ? -p.y : p.y;
        double c = std::cos(rotation), s = std::sin(rotation);
        return {translation.x + scale * (c * px - s * py),
                translation.y + scale * (s * px + c * py)};
    }

    // Columns of the 2x2 linear part.
    Vec2 linear_col0() const {
        double c = std::cos(rotation), s = std::sin(rotation);
        return {scale * c, scale * s};
    }
    Vec2 linear_col1() const {
        double c = std::cos(rotation), s = std::sin(rotation);
        double m = mirrored ? -1.0 : 1.0;
        return {scale * -s * m, scale * c * m};
    }
};

}  // namespace pftrail
