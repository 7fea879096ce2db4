#pragma once

#include <optional>

#include "fppm/frame.hpp"
#include "fppm/rng.hpp"
#include "fppm/scene.hpp"
#include "fppm/vec.hpp"

namespace fppm {

struct BsdfSample {
  Vec3 dir;             // sampled world direction, away from the surface
  Rgb weight;           // f * cos / pdf for the sampled direction
  double pdf_w = 0.0;   // solid-angle pdf (component pick included)
  double rev_pdf_w = 0.0; // pdf of sampling the fixed direction from dir
  double cos_theta = 0.0; // |cos| of dir against the shading normal
  bool is_delta = false;
};

/// A material bound to a shading point and a fixed direction wo (pointing
/// away from the surface, toward where the query came from). Delta lobes
/// (mirror, dielectric) evaluate to zero and only appear through sample().
class Bsdf {
public:
  Bsdf(const Material& material, const Normal3& shading_normal, const Vec3& wo,
       bool front_face);

  bool is_delta_only() const;

  /// Survival probability for Russian roulette; identical for the forward
  /// and reversed walk so recorded reverse densities stay meaningful.
  double continuation_prob() const;

  /// Non-delta reflectance toward wi, with the matching solid-angle pdfs for
  /// sampling wi from wo and wo from wi. Zero when wi leaves the surface.
  Rgb eval(const Vec3& wi, double& pdf_w, double& rev_pdf_w) const;

  /// Draws a direction; nullopt when the surface absorbs the sample.
  std::optional<BsdfSample> sample(RngStream& rng) const;

private:
  Rgb eval_phong(const Vec3& wi, double& pdf_w, double& rev_pdf_w) const;
  std::optional<BsdfSample> sample_dielectric(RngStream& rng) const;

  const Material& material_;
  TangentFrame frame_;
  Vec3 wo_;          // world space
  double cos_o_;     // dot(wo, shading normal)
  bool front_face_;
};

} // namespace fppm
