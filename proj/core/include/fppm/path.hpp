#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fppm/rng.hpp"
#include "fppm/scene.hpp"
#include "fppm/vec.hpp"

namespace fppm {

// Settings of the multiple-importance-sampling combination. eta_vm is
// n_vm * pi * r^2, the factor turning a light-side area density into the
// merge acceptance density; zero disables merging entirely.
struct MisContext {
  int n_vc = 1;
  int n_vm = 0;
  double beta = 1.0;
  double eta_vm = 0.0;
};

// Recursive partial sums of the weight denominator, carried along a subpath.
// d_vcm compares against the opposite endpoint technique, d_vc against
// connections, d_vm against merges deeper in the path.
struct MisPartials {
  double d_vcm = 0.0;
  double d_vc = 0.0;
  double d_vm = 0.0;
};

double mis_pow(const MisContext& ctx, double x);

// Partial-sum seeds and updates. All pdfs are solid-angle unless suffixed _a.
MisPartials mis_light_origin(const MisContext& ctx, double emission_pdf,
                             double direct_pdf_a, double cos_at_light,
                             bool delta_position);
MisPartials mis_camera_origin(const MisContext& ctx, double camera_pdf_w,
                              double n_light_paths);
void mis_arrive(const MisContext& ctx, MisPartials& p, double dist2, double cos_in);
void mis_scatter(const MisContext& ctx, MisPartials& p, double pdf_fwd_w,
                 double pdf_rev_w, double cos_out, bool is_delta);

// Weights for each way a full path can be completed.
double mis_weight_emitter_hit(const MisContext& ctx, const MisPartials& p,
                              double direct_pdf_a, double emission_pdf);
double mis_weight_nee(const MisContext& ctx, const MisPartials& p,
                      double bsdf_fwd_pdf_w, double bsdf_rev_pdf_w,
                      double direct_pdf_w, double emission_pdf_w,
                      double cos_at_light, double cos_to_light, bool delta_light);
double mis_weight_connect(const MisContext& ctx, const MisPartials& eye,
                          const MisPartials& light, double eye_fwd_pdf_a,
                          double eye_rev_pdf_w, double light_fwd_pdf_a,
                          double light_rev_pdf_w);
double mis_weight_merge(const MisContext& ctx, const MisPartials& eye,
                        const MisPartials& light, double bsdf_fwd_pdf_w,
                        double bsdf_rev_pdf_w);
double mis_weight_camera_connect(const MisContext& ctx, const MisPartials& light,
                                 double camera_pdf_a, double bsdf_rev_pdf_w,
                                 double n_light_paths);

struct PathVertex {
  Point3 position;
  Normal3 shading_normal;
  Normal3 geom_normal;
  Vec3 wo; // unit, toward the previous vertex
  Rgb throughput;
  int material = -1;
  int emitter = -1;
  bool is_delta = false;
  bool front_face = true;
  std::uint32_t depth = 0; // segments from the camera, first hit = 1
  MisPartials mis;
};

struct LightVertex {
  Point3 position;
  Normal3 shading_normal;
  Normal3 geom_normal;
  Vec3 wi; // unit, toward the previous vertex (where the energy came from)
  Rgb throughput;
  int material = -1;
  std::uint32_t path_index = 0;
  std::uint32_t depth = 0; // segments from the light, first hit = 1
  MisPartials mis;
  // Roulette survival probability of this vertex, stored so merge weights can
  // fold it into the hypothetical reverse density without rebuilding the bsdf.
  double cont = 1.0;
};

// Pinhole model. The image plane sits at the distance that makes one pixel
// exactly unit area, so pixel-space pdfs need no extra scaling.
struct CameraFrame {
  Point3 position;
  Vec3 forward, right, up; // orthonormal; raster y runs along -up
  double plane_dist = 1.0;
  int width = 0, height = 0;
};

CameraFrame make_camera_frame(const Camera& camera);
Ray make_camera_ray(const CameraFrame& cam, double sx, double sy);
double camera_pdf_w(const CameraFrame& cam, const Vec3& dir);

struct CameraProjection {
  double sx = 0.0, sy = 0.0; // raster position
  Vec3 to_camera;            // unit, from the world point
  double dist = 0.0;
  double pdf_w = 0.0; // solid-angle density of the corresponding camera ray
};
std::optional<CameraProjection> project_to_camera(const CameraFrame& cam,
                                                  const Point3& p);

// Emitter sampling. Joint emission pdfs are position*direction with delta
// factors stripped; pick probability over emitters is applied by callers.
struct EmissionSample {
  Point3 origin;
  Vec3 dir;
  Rgb weight; // emitted energy over the emission pdf
  double emission_pdf = 0.0;
  double direct_pdf_a = 0.0;
  double cos_at_light = 1.0;
  bool delta_position = false;
};
EmissionSample sample_emission(const Scene& scene, const Emitter& emitter,
                               RngStream& rng);

struct DirectSample {
  Vec3 to_light; // unit, from the receiving point
  double dist = 0.0;
  // Radiance for area lights. Delta lights return intensity and fold the
  // 1/dist^2 falloff into direct_pdf_w instead, which keeps the estimator
  // emitted * cos / direct_pdf_w uniform across kinds.
  Rgb emitted;
  double direct_pdf_w = 0.0;
  double emission_pdf = 0.0;
  double cos_at_light = 1.0;
  bool delta_light = false;
};
std::optional<DirectSample> sample_direct(const Scene& scene,
                                          const Emitter& emitter,
                                          const Point3& from, RngStream& rng);

// Pdfs for MIS when a traced ray happens to hit an area emitter.
struct EmitterHitPdfs {
  double direct_pdf_a = 0.0;
  double emission_pdf = 0.0;
};
std::optional<EmitterHitPdfs> emitter_hit_pdfs(const Scene& scene,
                                               const Emitter& emitter,
                                               const Vec3& ray_dir,
                                               const Normal3& outward_normal);

Rgb spot_texture_factor(const Emitter& spot, const Vec3& dir);

// Depth at which Russian roulette starts terminating walks.
constexpr std::uint32_t kRouletteDepth = 5;

struct EyePath {
  std::vector<PathVertex> vertices; // surface hits, delta vertices included
};
struct LightPath {
  std::vector<LightVertex> vertices; // non-delta deposits only
};

EyePath trace_eye_subpath(const Scene& scene, const MisContext& ctx,
                          const CameraFrame& cam, double sx, double sy,
                          std::uint32_t max_depth, double n_light_paths,
                          RngStream& rng);
LightPath trace_light_subpath(const Scene& scene, const MisContext& ctx,
                              std::uint32_t path_index, std::uint32_t max_depth,
                              RngStream& rng);

} // namespace fppm
