#include "fppm/path.hpp"

#include <cmath>

#include "fppm/bsdf.hpp"
#include "fppm/frame.hpp"
#include "fppm/sampling.hpp"

namespace fppm {

double mis_pow(const MisContext& ctx, double x) {
  return ctx.beta == 1.0 ? x : std::pow(x, ctx.beta);
}

namespace {

// Merge-vs-connection conversion factors; zero when merging is disabled so
// every merge term drops out of the sums arithmetically.
double vm_factor(const MisContext& ctx) {
  return ctx.eta_vm > 0.0 ? mis_pow(ctx, ctx.eta_vm) : 0.0;
}
double vc_factor(const MisContext& ctx) {
  return ctx.eta_vm > 0.0 ? mis_pow(ctx, 1.0 / ctx.eta_vm) : 0.0;
}

} // namespace

MisPartials mis_light_origin(const MisContext& ctx, double emission_pdf,
                             double direct_pdf_a, double cos_at_light,
                             bool delta_position) {
  MisPartials p;
  p.d_vcm = mis_pow(ctx, direct_pdf_a / emission_pdf);
  p.d_vc = delta_position ? 0.0 : mis_pow(ctx, cos_at_light / emission_pdf);
  p.d_vm = p.d_vc * vc_factor(ctx);
  return p;
}

MisPartials mis_camera_origin(const MisContext& ctx, double camera_pdf_w,
                              double n_light_paths) {
  MisPartials p;
  p.d_vcm = mis_pow(ctx, n_light_paths / camera_pdf_w);
  return p;
}

void mis_arrive(const MisContext& ctx, MisPartials& p, double dist2, double cos_in) {
  const double inv_cos = 1.0 / mis_pow(ctx, cos_in);
  p.d_vcm *= mis_pow(ctx, dist2) * inv_cos;
  p.d_vc *= inv_cos;
  p.d_vm *= inv_cos;
}

void mis_scatter(const MisContext& ctx, MisPartials& p, double pdf_fwd_w,
                 double pdf_rev_w, double cos_out, bool is_delta) {
  if (is_delta) {
    // Both pdfs are pick probabilities of the same lobe; only cos survives.
    const double f = mis_pow(ctx, cos_out * pdf_rev_w / pdf_fwd_w);
    p.d_vcm = 0.0;
    p.d_vc *= f;
    p.d_vm *= f;
    return;
  }
  const double ratio = mis_pow(ctx, cos_out / pdf_fwd_w);
  const double rev = mis_pow(ctx, pdf_rev_w);
  const double d_vc = ratio * (p.d_vc * rev + p.d_vcm + vm_factor(ctx));
  const double d_vm = ratio * (p.d_vm * rev + p.d_vcm * vc_factor(ctx) + 1.0);
  p.d_vc = d_vc;
  p.d_vm = d_vm;
  p.d_vcm = mis_pow(ctx, 1.0 / pdf_fwd_w);
}

double mis_weight_emitter_hit(const MisContext& ctx, const MisPartials& p,
                              double direct_pdf_a, double emission_pdf) {
  const double w_camera =
      mis_pow(ctx, direct_pdf_a) * p.d_vcm + mis_pow(ctx, emission_pdf) * p.d_vc;
  return 1.0 / (1.0 + w_camera);
}

double mis_weight_nee(const MisContext& ctx, const MisPartials& p,
                      double bsdf_fwd_pdf_w, double bsdf_rev_pdf_w,
                      double direct_pdf_w, double emission_pdf_w,
                      double cos_at_light, double cos_to_light, bool delta_light) {
  const double w_light =
      delta_light ? 0.0 : mis_pow(ctx, bsdf_fwd_pdf_w / direct_pdf_w);
  const double w_camera =
      mis_pow(ctx, emission_pdf_w * cos_to_light / (direct_pdf_w * cos_at_light)) *
      (vm_factor(ctx) + p.d_vcm + p.d_vc * mis_pow(ctx, bsdf_rev_pdf_w));
  return 1.0 / (w_light + 1.0 + w_camera);
}

double mis_weight_connect(const MisContext& ctx, const MisPartials& eye,
                          const MisPartials& light, double eye_fwd_pdf_a,
                          double eye_rev_pdf_w, double light_fwd_pdf_a,
                          double light_rev_pdf_w) {
  const double w_light =
      mis_pow(ctx, eye_fwd_pdf_a) *
      (vm_factor(ctx) + light.d_vcm + light.d_vc * mis_pow(ctx, light_rev_pdf_w));
  const double w_camera =
      mis_pow(ctx, light_fwd_pdf_a) *
      (vm_factor(ctx) + eye.d_vcm + eye.d_vc * mis_pow(ctx, eye_rev_pdf_w));
  return 1.0 / (w_light + 1.0 + w_camera);
}

double mis_weight_merge(const MisContext& ctx, const MisPartials& eye,
                        const MisPartials& light, double bsdf_fwd_pdf_w,
                        double bsdf_rev_pdf_w) {
  const double w_light =
      light.d_vcm * vc_factor(ctx) + light.d_vm * mis_pow(ctx, bsdf_fwd_pdf_w);
  const double w_camera =
      eye.d_vcm * vc_factor(ctx) + eye.d_vm * mis_pow(ctx, bsdf_rev_pdf_w);
  return 1.0 / (w_light + 1.0 + w_camera);
}

double mis_weight_camera_connect(const MisContext& ctx, const MisPartials& light,
                                 double camera_pdf_a, double bsdf_rev_pdf_w,
                                 double n_light_paths) {
  const double w_light =
      mis_pow(ctx, camera_pdf_a / n_light_paths) *
      (vm_factor(ctx) + light.d_vcm + light.d_vc * mis_pow(ctx, bsdf_rev_pdf_w));
  return 1.0 / (w_light + 1.0);
}

CameraFrame make_camera_frame(const Camera& camera) {
  CameraFrame cam;
  cam.position = camera.position;
  cam.forward = normalize(camera.look_at - camera.position);
  cam.right = normalize(cross(cam.forward, camera.up));
  cam.up = cross(cam.right, cam.forward);
  cam.width = camera.width;
  cam.height = camera.height;
  const double half_fov = 0.5 * camera.vfov_deg * kPi / 180.0;
  cam.plane_dist = (camera.height * 0.5) / std::tan(half_fov);
  return cam;
}

Ray make_camera_ray(const CameraFrame& cam, double sx, double sy) {
  Ray ray;
  ray.origin = cam.position;
  ray.dir = normalize(cam.forward * cam.plane_dist +
                      cam.right * (sx - 0.5 * cam.width) +
                      cam.up * (0.5 * cam.height - sy));
  return ray;
}

double camera_pdf_w(const CameraFrame& cam, const Vec3& dir) {
  const double cos_theta = dot(dir, cam.forward);
  if (cos_theta <= 0.0) return 0.0;
  return cam.plane_dist * cam.plane_dist / (cos_theta * cos_theta * cos_theta);
}

std::optional<CameraProjection> project_to_camera(const CameraFrame& cam,
                                                  const Point3& p) {
  const Vec3 v = p - cam.position;
  const double dist = length(v);
  if (dist == 0.0) return std::nullopt;
  const Vec3 d = v * (1.0 / dist);
  const double cos_theta = dot(d, cam.forward);
  if (cos_theta <= 1e-9) return std::nullopt;
  const Vec3 on_plane = d * (cam.plane_dist / cos_theta);
  CameraProjection proj;
  proj.sx = 0.5 * cam.width + dot(on_plane, cam.right);
  proj.sy = 0.5 * cam.height - dot(on_plane, cam.up);
  if (proj.sx < 0.0 || proj.sx >= cam.width || proj.sy < 0.0 ||
      proj.sy >= cam.height)
    return std::nullopt;
  proj.to_camera = -d;
  proj.dist = dist;
  proj.pdf_w = cam.plane_dist * cam.plane_dist /
               (cos_theta * cos_theta * cos_theta);
  return proj;
}

namespace {

struct AreaPoint {
  Point3 position;
  Normal3 normal;
  double pdf_a = 0.0;
};

AreaPoint sample_area_point(const Scene& scene, const Emitter& e, RngStream& rng) {
  const Primitive& prim = scene.primitives[static_cast<std::size_t>(e.primitive)];
  AreaPoint out;
  if (prim.kind == ShapeKind::quad) {
    const double u = rng.next_double();
    const double v = rng.next_double();
    out.position = prim.quad.corner + prim.quad.e1 * u + prim.quad.e2 * v;
    out.normal = normalize(cross(prim.quad.e1, prim.quad.e2));
  } else {
    const Vec3 d = sample_uniform_sphere(rng.next_double(), rng.next_double());
    out.position = prim.sphere.center + d * prim.sphere.radius;
    out.normal = d;
  }
  out.pdf_a = 1.0 / primitive_area(prim);
  return out;
}

double area_position_pdf(const Scene& scene, const Emitter& e) {
  return 1.0 / primitive_area(scene.primitives[static_cast<std::size_t>(e.primitive)]);
}

double spot_cone_cos(const Emitter& e) {
  return std::cos(e.cone_angle_deg * kPi / 180.0);
}

} // namespace

Rgb spot_texture_factor(const Emitter& spot, const Vec3& dir) {
  if (spot.texture.width == 0) return Rgb(1.0);
  const TangentFrame frame = build_tangent_frame(normalize(spot.direction));
  const Vec3 local = frame.to_local(dir);
  const double cone = spot.cone_angle_deg * kPi / 180.0;
  const double theta = std::acos(std::clamp(local.z, -1.0, 1.0));
  if (theta > cone) return Rgb(0.0);
  double phi = std::atan2(local.y, local.x);
  if (phi < 0.0) phi += kTwoPi;
  // Equirectangular within the cone: phi spans u, polar angle spans v.
  const int x = std::min(spot.texture.width - 1,
                         static_cast<int>(phi / kTwoPi * spot.texture.width));
  const int y = std::min(spot.texture.height - 1,
                         static_cast<int>(theta / cone * spot.texture.height));
  return spot.texture.at(x, y);
}

EmissionSample sample_emission(const Scene& scene, const Emitter& emitter,
                               RngStream& rng) {
  EmissionSample out;
  switch (emitter.kind) {
    case EmitterKind::area: {
      const AreaPoint ap = sample_area_point(scene, emitter, rng);
      const TangentFrame frame = build_tangent_frame(ap.normal);
      const Vec3 local = sample_cosine_hemisphere(rng.next_double(), rng.next_double());
      out.origin = ap.position;
      out.dir = frame.to_world(local);
      out.cos_at_light = local.z;
      out.emission_pdf = ap.pdf_a * cosine_hemisphere_pdf_w(local.z);
      out.direct_pdf_a = ap.pdf_a;
      // radiance * cos / (pdf_a * cos/pi) = radiance * pi / pdf_a
      out.weight = emitter.radiance * (kPi / ap.pdf_a);
      return out;
    }
    case EmitterKind::point: {
      out.origin = emitter.position;
      out.dir = sample_uniform_sphere(rng.next_double(), rng.next_double());
      out.emission_pdf = 1.0 / (4.0 * kPi);
      out.direct_pdf_a = 1.0;
      out.delta_position = true;
      out.weight = emitter.intensity * (4.0 * kPi);
      return out;
    }
    case EmitterKind::spot: {
      const Vec3 axis = normalize(emitter.direction);
      const TangentFrame frame = build_tangent_frame(axis);
      const double cos_cone = spot_cone_cos(emitter);
      const Vec3 local = sample_uniform_cone(rng.next_double(), rng.next_double(), cos_cone);
      out.origin = emitter.position;
      out.dir = frame.to_world(local);
      out.emission_pdf = uniform_cone_pdf_w(cos_cone);
      out.direct_pdf_a = 1.0;
      out.delta_position = true;
      out.weight = emitter.intensity * spot_texture_factor(emitter, out.dir) *
                   (1.0 / out.emission_pdf);
      return out;
    }
  }
  return out;
}

std::optional<DirectSample> sample_direct(const Scene& scene,
                                          const Emitter& emitter,
                                          const Point3& from, RngStream& rng) {
  DirectSample out;
  switch (emitter.kind) {
    case EmitterKind::area: {
      const AreaPoint ap = sample_area_point(scene, emitter, rng);
      const Vec3 v = ap.position - from;
      const double dist2 = length_squared(v);
      if (dist2 == 0.0) return std::nullopt;
      out.dist = std::sqrt(dist2);
      out.to_light = v * (1.0 / out.dist);
      out.cos_at_light = dot(ap.normal, -out.to_light);
      if (out.cos_at_light <= 0.0) return std::nullopt; // back side is dark
      out.emitted = emitter.radiance;
      out.direct_pdf_w = ap.pdf_a * dist2 / out.cos_at_light;
      out.emission_pdf = ap.pdf_a * cosine_hemisphere_pdf_w(out.cos_at_light);
      return out;
    }
    case EmitterKind::point: {
      const Vec3 v = emitter.position - from;
      const double dist2 = length_squared(v);
      if (dist2 == 0.0) return std::nullopt;
      out.dist = std::sqrt(dist2);
      out.to_light = v * (1.0 / out.dist);
      out.emitted = emitter.intensity;
      out.direct_pdf_w = dist2;
      out.emission_pdf = 1.0 / (4.0 * kPi);
      out.delta_light = true;
      return out;
    }
    case EmitterKind::spot: {
      const Vec3 v = emitter.position - from;
      const double dist2 = length_squared(v);
      if (dist2 == 0.0) return std::nullopt;
      out.dist = std::sqrt(dist2);
      out.to_light = v * (1.0 / out.dist);
      const Vec3 exit_dir = -out.to_light;
      if (dot(exit_dir, normalize(emitter.direction)) < spot_cone_cos(emitter))
        return std::nullopt;
      out.emitted = emitter.intensity * spot_texture_factor(emitter, exit_dir);
      out.direct_pdf_w = dist2;
      out.emission_pdf = uniform_cone_pdf_w(spot_cone_cos(emitter));
      out.delta_light = true;
      return out;
    }
  }
  return std::nullopt;
}

std::optional<EmitterHitPdfs> emitter_hit_pdfs(const Scene& scene,
                                               const Emitter& emitter,
                                               const Vec3& ray_dir,
                                               const Normal3& outward_normal) {
  if (emitter.kind != EmitterKind::area) return std::nullopt;
  const double cos_exit = dot(outward_normal, -ray_dir);
  if (cos_exit <= 0.0) return std::nullopt;
  EmitterHitPdfs out;
  out.direct_pdf_a = area_position_pdf(scene, emitter);
  out.emission_pdf = out.direct_pdf_a * cosine_hemisphere_pdf_w(cos_exit);
  return out;
}

EyePath trace_eye_subpath(const Scene& scene, const MisContext& ctx,
                          const CameraFrame& cam, double sx, double sy,
                          std::uint32_t max_depth, double n_light_paths,
                          RngStream& rng) {
  EyePath path;
  Ray ray = make_camera_ray(cam, sx, sy);
  MisPartials mis = mis_camera_origin(ctx, camera_pdf_w(cam, ray.dir), n_light_paths);
  Rgb throughput(1.0);

  for (std::uint32_t depth = 1; depth <= max_depth; ++depth) {
    const auto hit = intersect(scene, ray);
    if (!hit) break;
    const Vec3 wo = -ray.dir;
    const double cos_in = std::abs(dot(hit->shading_normal, wo));
    if (cos_in == 0.0) break;
    mis_arrive(ctx, mis, hit->t * hit->t, cos_in);

    const Material& material = scene.materials[static_cast<std::size_t>(hit->material)];
    const Bsdf bsdf(material, hit->shading_normal, wo, hit->front_face);

    PathVertex v;
    v.position = hit->point;
    v.shading_normal = hit->shading_normal;
    v.geom_normal = hit->geom_normal;
    v.wo = wo;
    v.throughput = throughput;
    v.material = hit->material;
    v.emitter = hit->emitter;
    v.is_delta = bsdf.is_delta_only();
    v.front_face = hit->front_face;
    v.depth = depth;
    v.mis = mis;
    path.vertices.push_back(v);

    if (depth == max_depth) break;
    const auto s = bsdf.sample(rng);
    if (!s || s->pdf_w <= 0.0 || s->weight.is_black()) break;

    double q = 1.0;
    if (depth >= kRouletteDepth) {
      q = bsdf.continuation_prob();
      if (rng.next_double() >= q) break;
    }
    // Survival is treated as a property of the vertex alone, so every density
    // entering the weights carries the local continuation probability, whether
    // or not the dice were actually rolled at this depth. Using one consistent
    // value per vertex is what keeps the weights a partition of unity; the
    // estimator itself divides by q only when a roll happened.
    const double cont = bsdf.continuation_prob();
    mis_scatter(ctx, mis, s->pdf_w * cont, s->rev_pdf_w * cont, s->cos_theta,
                s->is_delta);
    throughput = throughput * s->weight / q;
    ray = Ray{hit->point, s->dir};
  }
  return path;
}

LightPath trace_light_subpath(const Scene& scene, const MisContext& ctx,
                              std::uint32_t path_index, std::uint32_t max_depth,
                              RngStream& rng) {
  LightPath path;
  if (scene.emitters.empty()) return path;
  const std::size_t n = scene.emitters.size();
  const std::size_t pick =
      std::min(n - 1, static_cast<std::size_t>(rng.next_double() * n));
  const double pick_prob = 1.0 / static_cast<double>(n);
  const Emitter& emitter = scene.emitters[pick];

  const EmissionSample es = sample_emission(scene, emitter, rng);
  if (es.emission_pdf <= 0.0 || es.weight.is_black()) return path;
  MisPartials mis =
      mis_light_origin(ctx, es.emission_pdf * pick_prob, es.direct_pdf_a * pick_prob,
                       es.cos_at_light, es.delta_position);
  Rgb throughput = es.weight / pick_prob;
  Ray ray{es.origin, es.dir};

  for (std::uint32_t depth = 1; depth <= max_depth; ++depth) {
    const auto hit = intersect(scene, ray);
    if (!hit) break;
    const Vec3 wi = -ray.dir;
    const double cos_in = std::abs(dot(hit->shading_normal, wi));
    if (cos_in == 0.0) break;
    mis_arrive(ctx, mis, hit->t * hit->t, cos_in);

    const Material& material = scene.materials[static_cast<std::size_t>(hit->material)];
    const Bsdf bsdf(material, hit->shading_normal, wi, hit->front_face);

    if (!bsdf.is_delta_only()) {
      LightVertex v;
      v.position = hit->point;
      v.shading_normal = hit->shading_normal;
      v.geom_normal = hit->geom_normal;
      v.wi = wi;
      v.throughput = throughput;
      v.material = hit->material;
      v.path_index = path_index;
      v.depth = depth;
      v.mis = mis;
      v.cont = bsdf.continuation_prob();
      path.vertices.push_back(v);
    }

    if (depth == max_depth) break;
    const auto s = bsdf.sample(rng);
    if (!s || s->pdf_w <= 0.0 || s->weight.is_black()) break;

    double q = 1.0;
    if (depth >= kRouletteDepth) {
      q = bsdf.continuation_prob();
      if (rng.next_double() >= q) break;
    }
    const double cont = bsdf.continuation_prob();
    mis_scatter(ctx, mis, s->pdf_w * cont, s->rev_pdf_w * cont, s->cos_theta,
                s->is_delta);
    throughput = throughput * s->weight / q;
    ray = Ray{hit->point, s->dir};
  }
  return path;
}

} // namespace fppm
