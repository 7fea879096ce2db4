#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fppm/film.hpp"
#include "fppm/vec.hpp"

namespace fppm {

enum class MaterialKind { lambertian, mirror, dielectric, phong };

struct Material {
  MaterialKind kind = MaterialKind::lambertian;
  std::string name;
  Rgb albedo;              // lambertian
  Rgb reflectance;         // mirror
  double ior = 1.5;        // dielectric
  Rgb tint{1.0, 1.0, 1.0}; // dielectric
  Rgb diffuse;             // phong
  Rgb specular;            // phong
  double exponent = 1.0;   // phong
};

enum class EmitterKind { area, point, spot };

struct Emitter {
  EmitterKind kind = EmitterKind::area;
  int primitive = -1; // area: index of the shape this emitter lives on
  Rgb radiance;       // area
  Point3 position;    // point, spot
  Rgb intensity;      // point, spot
  Vec3 direction{0.0, 0.0, -1.0}; // spot axis
  double cone_angle_deg = 30.0;   // spot half-angle; degrees are authoritative
  std::string texture_path;       // spot, optional
  Image texture;                  // loaded when texture_path is set
};

enum class ShapeKind { sphere, quad, mesh };

struct Sphere {
  Point3 center;
  double radius = 1.0;
};

// Parallelogram corner + two edges; surface is corner + u*e1 + v*e2 with
// u, v in [0,1] and outward normal along e1 x e2.
struct Quad {
  Point3 corner;
  Vec3 e1;
  Vec3 e2;
};

struct MeshTri {
  int v0, v1, v2;
  int n0 = -1, n1 = -1, n2 = -1; // per-vertex normals, -1 when absent
};

struct Primitive {
  ShapeKind kind = ShapeKind::sphere;
  std::string name; // auto-assigned: kind + index in declaration order
  Sphere sphere;
  Quad quad;
  std::vector<Point3> vertices; // mesh
  std::vector<Vec3> normals;    // mesh
  std::vector<MeshTri> tris;    // mesh
  std::string obj_path;         // mesh source, kept for serialization
  int material = -1;
  int emitter = -1; // attached area emitter, -1 if none
};

struct Camera {
  Point3 position;
  Point3 look_at{0.0, 0.0, -1.0};
  Vec3 up{0.0, 1.0, 0.0};
  double vfov_deg = 45.0;
  int width = 1;
  int height = 1;
};

struct Scene {
  bool has_camera = false;
  Camera camera;
  std::vector<Material> materials;
  std::vector<Primitive> primitives;
  std::vector<Emitter> emitters;

  // Flat BVH over spheres, quads and individual mesh triangles.
  struct AccelNode {
    Vec3 box_min, box_max;
    int left = -1, right = -1; // interior children
    int first = 0, count = 0;  // leaf unit range
  };
  struct AccelUnit {
    int primitive = -1;
    int tri = -1; // triangle index within a mesh primitive, -1 otherwise
  };
  std::vector<AccelNode> accel_nodes;
  std::vector<AccelUnit> accel_units;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses the line-oriented scene text. Relative obj/texture paths resolve
// against base_dir. Throws ParseError with file:line:column positions.
Scene parse_scene(const std::string& text, const std::string& base_dir = "",
                  const std::string& file_label = "<scene>");
Scene load_scene(const std::string& path);

// Canonical text form: camera, materials, primitives (area emission inline),
// then point and spot lights, all numbers %.17g. parse(serialize(s)) followed
// by serialize reproduces the same bytes.
std::string serialize_scene(const Scene& scene);

// Relative offset guarding shadow and secondary rays against self-hits.
constexpr double kShadowEps = 1e-6;

struct Ray {
  Point3 origin;
  Vec3 dir; // unit length
  double t_min = 1e-6;
  double t_max = 1e300;
};

struct Hit {
  double t = 0.0;
  Point3 point;
  Normal3 geom_normal;    // oriented toward the ray origin side
  Normal3 shading_normal; // interpolated, flipped to the geom_normal side
  bool front_face = true; // ray origin on the outward-normal side
  int primitive = -1;
  int material = -1;
  int emitter = -1;
};

// Per-shape intersection helpers; also the brute-force oracle used by tests.
std::optional<double> intersect_sphere(const Sphere& s, const Ray& ray);
std::optional<double> intersect_quad(const Quad& q, const Ray& ray);
std::optional<double> intersect_triangle(const Point3& a, const Point3& b,
                                         const Point3& c, const Ray& ray,
                                         double& bu, double& bv);

// Rebuilds the BVH; parse_scene calls this, hand-assembled scenes must too.
void build_accel(Scene& scene);

std::optional<Hit> intersect(const Scene& scene, const Ray& ray);

// True when the open segment between a and b is blocked.
bool occluded(const Scene& scene, const Point3& a, const Point3& b);

double primitive_area(const Primitive& prim);

// Half the diagonal of the axis-aligned box around non-emitting geometry
// (all geometry when everything emits). Throws on an empty scene.
double bounding_radius(const Scene& scene);

} // namespace fppm
