#include "fppm/bsdf.hpp"

#include <algorithm>
#include <cmath>

#include "fppm/sampling.hpp"

namespace fppm {
namespace {

// Fresnel reflectance for unpolarized light; eta is inside/outside when the
// ray arrives from outside. Total internal reflection returns 1.
double fresnel_dielectric(double cos_i, double eta) {
  const double sin2_t = (1.0 - cos_i * cos_i) / (eta * eta);
  if (sin2_t >= 1.0) return 1.0;
  const double cos_t = std::sqrt(1.0 - sin2_t);
  const double rs = (cos_i - eta * cos_t) / (cos_i + eta * cos_t);
  const double rp = (eta * cos_i - cos_t) / (eta * cos_i + cos_t);
  return 0.5 * (rs * rs + rp * rp);
}

double phong_lobe_pdf(double exponent, double cos_alpha) {
  if (cos_alpha <= 0.0) return 0.0;
  return (exponent + 1.0) * kInvPi * 0.5 * std::pow(cos_alpha, exponent);
}

} // namespace

Bsdf::Bsdf(const Material& material, const Normal3& shading_normal,
           const Vec3& wo, bool front_face)
    : material_(material),
      frame_(build_tangent_frame(shading_normal)),
      wo_(wo),
      cos_o_(dot(wo, shading_normal)),
      front_face_(front_face) {}

bool Bsdf::is_delta_only() const {
  return material_.kind == MaterialKind::mirror ||
         material_.kind == MaterialKind::dielectric;
}

double Bsdf::continuation_prob() const {
  Rgb a;
  switch (material_.kind) {
    case MaterialKind::lambertian: a = material_.albedo; break;
    case MaterialKind::mirror: a = material_.reflectance; break;
    case MaterialKind::dielectric: a = material_.tint; break;
    case MaterialKind::phong: a = material_.diffuse + material_.specular; break;
  }
  return std::min(1.0, a.max_component());
}

Rgb Bsdf::eval(const Vec3& wi, double& pdf_w, double& rev_pdf_w) const {
  pdf_w = 0.0;
  rev_pdf_w = 0.0;
  const double cos_i = dot(wi, frame_.n);
  // Transmission through the shading plane never carries non-delta energy.
  if (cos_o_ <= 0.0 || cos_i <= 0.0) return Rgb();
  switch (material_.kind) {
    case MaterialKind::lambertian:
      pdf_w = cosine_hemisphere_pdf_w(cos_i);
      rev_pdf_w = cosine_hemisphere_pdf_w(cos_o_);
      return material_.albedo * kInvPi;
    case MaterialKind::phong:
      return eval_phong(wi, pdf_w, rev_pdf_w);
    case MaterialKind::mirror:
    case MaterialKind::dielectric:
      return Rgb();
  }
  return Rgb();
}

Rgb Bsdf::eval_phong(const Vec3& wi, double& pdf_w, double& rev_pdf_w) const {
  const double cos_i = dot(wi, frame_.n);
  const double diffuse_w = material_.diffuse.max_component();
  const double specular_w = material_.specular.max_component();
  const double total = diffuse_w + specular_w;
  if (total <= 0.0) return Rgb();

  // cos of wi against the mirror direction of wo; symmetric under swap.
  const double cos_alpha = dot(wi, reflect(wo_, frame_.n));
  const double lobe = phong_lobe_pdf(material_.exponent, cos_alpha);

  pdf_w = (diffuse_w * cosine_hemisphere_pdf_w(cos_i) + specular_w * lobe) / total;
  rev_pdf_w = (diffuse_w * cosine_hemisphere_pdf_w(cos_o_) + specular_w * lobe) / total;

  Rgb f = material_.diffuse * kInvPi;
  if (cos_alpha > 0.0)
    f += material_.specular * ((material_.exponent + 2.0) * kInvPi * 0.5 *
                               std::pow(cos_alpha, material_.exponent));
  return f;
}

std::optional<BsdfSample> Bsdf::sample(RngStream& rng) const {
  if (material_.kind == MaterialKind::dielectric) return sample_dielectric(rng);
  if (cos_o_ <= 0.0) return std::nullopt;

  BsdfSample out;
  switch (material_.kind) {
    case MaterialKind::lambertian: {
      const Vec3 local = sample_cosine_hemisphere(rng.next_double(), rng.next_double());
      out.dir = frame_.to_world(local);
      out.cos_theta = local.z;
      if (out.cos_theta <= 0.0) return std::nullopt;
      out.pdf_w = cosine_hemisphere_pdf_w(out.cos_theta);
      out.rev_pdf_w = cosine_hemisphere_pdf_w(cos_o_);
      out.weight = material_.albedo; // (albedo/pi) * cos / (cos/pi)
      return out;
    }
    case MaterialKind::mirror: {
      out.dir = reflect(wo_, frame_.n);
      out.cos_theta = dot(out.dir, frame_.n);
      out.pdf_w = 1.0;
      out.rev_pdf_w = 1.0;
      out.weight = material_.reflectance;
      out.is_delta = true;
      return out;
    }
    case MaterialKind::phong: {
      const double diffuse_w = material_.diffuse.max_component();
      const double specular_w = material_.specular.max_component();
      const double total = diffuse_w + specular_w;
      if (total <= 0.0) return std::nullopt;
      if (rng.next_double() * total < diffuse_w) {
        const Vec3 local = sample_cosine_hemisphere(rng.next_double(), rng.next_double());
        out.dir = frame_.to_world(local);
      } else {
        // Power-cosine lobe around the mirror direction.
        const double u1 = rng.next_double();
        const double u2 = rng.next_double();
        const double cos_a = std::pow(u1, 1.0 / (material_.exponent + 1.0));
        const double sin_a = std::sqrt(std::max(0.0, 1.0 - cos_a * cos_a));
        const double phi = kTwoPi * u2;
        const TangentFrame lobe_frame = build_tangent_frame(reflect(wo_, frame_.n));
        out.dir = lobe_frame.to_world(
            {sin_a * std::cos(phi), sin_a * std::sin(phi), cos_a});
      }
      out.cos_theta = dot(out.dir, frame_.n);
      if (out.cos_theta <= 0.0) return std::nullopt;
      const Rgb f = eval(out.dir, out.pdf_w, out.rev_pdf_w);
      if (out.pdf_w <= 0.0) return std::nullopt;
      out.weight = f * (out.cos_theta / out.pdf_w);
      return out;
    }
    case MaterialKind::dielectric:
      break;
  }
  return std::nullopt;
}

std::optional<BsdfSample> Bsdf::sample_dielectric(RngStream& rng) const {
  // Shading normal already faces the incoming side; front_face tells us
  // whether that side is outside the glass.
  const double eta = front_face_ ? material_.ior : 1.0 / material_.ior;
  const double cos_i = cos_o_;
  if (cos_i <= 0.0) return std::nullopt;
  const double fr = fresnel_dielectric(cos_i, eta);

  BsdfSample out;
  out.is_delta = true;
  if (rng.next_double() < fr) {
    out.dir = reflect(wo_, frame_.n);
    out.cos_theta = dot(out.dir, frame_.n);
    out.pdf_w = fr;
    out.rev_pdf_w = fr;
    out.weight = material_.tint;
  } else {
    const double sin2_t = (1.0 - cos_i * cos_i) / (eta * eta);
    const double cos_t = std::sqrt(std::max(0.0, 1.0 - sin2_t));
    // Refract into the opposite hemisphere of the shading normal.
    out.dir = normalize(wo_ * (-1.0 / eta) +
                        frame_.n * (cos_i / eta - cos_t));
    out.cos_theta = cos_t;
    out.pdf_w = 1.0 - fr;
    out.rev_pdf_w = 1.0 - fr;
    // Radiance is carried symmetrically: no eta^2 compression on the way in
    // or out, which keeps the transport kernel reciprocal for bidirectional
    // use.
    out.weight = material_.tint;
  }
  return out;
}

} // namespace fppm
