#pragma once

#include "fppm/vec.hpp"

namespace fppm {

/// Right-handed orthonormal basis around a unit normal: cross(u, v) == n.
struct TangentFrame {
  Vec3 u, v;
  Normal3 n;

  Vec3 to_world(const Vec3 &local) const {
    return u * local.x + v * local.y + n * local.z;
  }
  Vec3 to_local(const Vec3 &world) const {
    return {dot(world, u), dot(world, v), dot(world, n)};
  }
};

/// Branchless basis construction (Duff et al. style). Stable for all unit n,
/// including the poles: n=(0,0,1) yields u=(1,0,0), v=(0,1,0).
TangentFrame build_tangent_frame(const Normal3 &n);

/// 2D coordinates in the tangent plane of a gather point. Samples from every
/// iteration are projected into this shared chart so their statistics pool.
struct UnifiedPoint {
  double u = 0, v = 0;
};

/// Project x_star into the tangent plane at x: (dot(x_star-x, u), dot(x_star-x, v)).
/// Inverse of map_from_unified for in-plane points.
inline UnifiedPoint map_to_unified(const Point3 &x, const Point3 &x_star,
                                   const TangentFrame &frame) {
  const Vec3 d = x_star - x;
  return {dot(d, frame.u), dot(d, frame.v)};
}

/// Lift plane coordinates back to 3D: x + u*y_u + v*y_v.
inline Point3 map_from_unified(const Point3 &x, const UnifiedPoint &y,
                               const TangentFrame &frame) {
  return x + frame.u * y.u + frame.v * y.v;
}

} // namespace fppm
