#pragma once

#include <algorithm>
#include <cmath>

namespace fppm {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3() = default;
  Vec3(double ax, double ay, double az) : x(ax), y(ay), z(az) {}
  explicit Vec3(double a) : x(a), y(a), z(a) {}

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator+(const Vec3 &b) const { return {x + b.x, y + b.y, z + b.z}; }
  Vec3 operator-(const Vec3 &b) const { return {x - b.x, y - b.y, z - b.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 &operator+=(const Vec3 &b) { x += b.x; y += b.y; z += b.z; return *this; }
  Vec3 &operator-=(const Vec3 &b) { x -= b.x; y -= b.y; z -= b.z; return *this; }
  Vec3 &operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  bool operator==(const Vec3 &b) const { return x == b.x && y == b.y && z == b.z; }
};

inline Vec3 operator*(double s, const Vec3 &v) { return v * s; }

inline double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3 &a, const Vec3 &b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double length_squared(const Vec3 &v) { return dot(v, v); }
inline double length(const Vec3 &v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalize(const Vec3 &v) { return v / length(v); }

inline Vec3 min(const Vec3 &a, const Vec3 &b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 max(const Vec3 &a, const Vec3 &b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

using Point3 = Vec3;
using Normal3 = Vec3;

/// Linear RGB triple. Radiance, throughput and film values all live here.
struct Rgb {
  double r = 0, g = 0, b = 0;

  Rgb() = default;
  Rgb(double ar, double ag, double ab) : r(ar), g(ag), b(ab) {}
  explicit Rgb(double a) : r(a), g(a), b(a) {}

  double operator[](int i) const { return i == 0 ? r : (i == 1 ? g : b); }

  Rgb operator+(const Rgb &o) const { return {r + o.r, g + o.g, b + o.b}; }
  Rgb operator-(const Rgb &o) const { return {r - o.r, g - o.g, b - o.b}; }
  Rgb operator*(const Rgb &o) const { return {r * o.r, g * o.g, b * o.b}; }
  Rgb operator*(double s) const { return {r * s, g * s, b * s}; }
  Rgb operator/(double s) const { return {r / s, g / s, b / s}; }
  Rgb &operator+=(const Rgb &o) { r += o.r; g += o.g; b += o.b; return *this; }
  Rgb &operator*=(const Rgb &o) { r *= o.r; g *= o.g; b *= o.b; return *this; }
  Rgb &operator*=(double s) { r *= s; g *= s; b *= s; return *this; }

  bool operator==(const Rgb &o) const { return r == o.r && g == o.g && b == o.b; }

  bool is_black() const { return r == 0 && g == 0 && b == 0; }
  double max_component() const { return std::max(r, std::max(g, b)); }
};

inline Rgb operator*(double s, const Rgb &c) { return c * s; }

/// Rec. 709 luminance of linear RGB.
inline double luminance(const Rgb &c) {
  return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b;
}

} // namespace fppm
