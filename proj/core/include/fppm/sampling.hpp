#pragma once

#include <numbers>

#include "fppm/vec.hpp"

namespace fppm {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInvPi = std::numbers::inv_pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Cosine-weighted hemisphere direction in local coordinates (z up).
/// r = sqrt(u1), phi = 2*pi*u2, so u1 = 0 maps to the pole (0,0,1) exactly.
inline Vec3 sample_cosine_hemisphere(double u1, double u2) {
  const double r = std::sqrt(u1);
  const double phi = kTwoPi * u2;
  return {r * std::cos(phi), r * std::sin(phi), std::sqrt(std::max(0.0, 1.0 - u1))};
}

inline double cosine_hemisphere_pdf_w(double cos_theta) {
  return cos_theta > 0 ? cos_theta * kInvPi : 0.0;
}

inline Vec3 sample_uniform_sphere(double u1, double u2) {
  const double z = 1.0 - 2.0 * u1;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = kTwoPi * u2;
  return {r * std::cos(phi), r * std::sin(phi), z};
}

inline constexpr double uniform_sphere_pdf_w() { return 1.0 / (4.0 * kPi); }

/// Uniform direction in the cone around +z with half-angle acos(cos_max).
inline Vec3 sample_uniform_cone(double u1, double u2, double cos_max) {
  const double z = 1.0 - u1 * (1.0 - cos_max);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = kTwoPi * u2;
  return {r * std::cos(phi), r * std::sin(phi), z};
}

inline double uniform_cone_pdf_w(double cos_max) {
  return 1.0 / (kTwoPi * (1.0 - cos_max));
}

/// Mirror wi about n. Both arguments point away from the surface.
inline Vec3 reflect(const Vec3 &wi, const Normal3 &n) {
  return n * (2.0 * dot(wi, n)) - wi;
}

} // namespace fppm
