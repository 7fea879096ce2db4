#include "fppm/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fppm/sampling.hpp"

namespace fppm {

std::optional<double> intersect_sphere(const Sphere& s, const Ray& ray) {
  const Vec3 oc = ray.origin - s.center;
  const double b = dot(oc, ray.dir);
  const double c = dot(oc, oc) - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  // Stable root pair: q avoids cancellation when b and the root agree in sign.
  const double q = b < 0.0 ? -b + sq : -b - sq;
  double t0 = q;
  double t1 = q != 0.0 ? c / q : 0.0;
  if (t0 > t1) std::swap(t0, t1);
  if (t0 > ray.t_min && t0 < ray.t_max) return t0;
  if (t1 > ray.t_min && t1 < ray.t_max) return t1;
  return std::nullopt;
}

std::optional<double> intersect_quad(const Quad& q, const Ray& ray) {
  const Vec3 n = cross(q.e1, q.e2);
  const double denom = dot(ray.dir, n);
  if (denom == 0.0) return std::nullopt;
  const double t = dot(q.corner - ray.origin, n) / denom;
  if (t <= ray.t_min || t >= ray.t_max) return std::nullopt;
  const Vec3 rel = ray.origin + ray.dir * t - q.corner;
  // Solve rel = u*e1 + v*e2 through the 2x2 Gram system.
  const double a11 = dot(q.e1, q.e1), a12 = dot(q.e1, q.e2), a22 = dot(q.e2, q.e2);
  const double b1 = dot(rel, q.e1), b2 = dot(rel, q.e2);
  const double det = a11 * a22 - a12 * a12;
  if (det == 0.0) return std::nullopt;
  const double u = (b1 * a22 - b2 * a12) / det;
  const double v = (b2 * a11 - b1 * a12) / det;
  if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) return std::nullopt;
  return t;
}

std::optional<double> intersect_triangle(const Point3& a, const Point3& b,
                                         const Point3& c, const Ray& ray,
                                         double& bu, double& bv) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = cross(ray.dir, e2);
  const double det = dot(e1, p);
  if (det == 0.0) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = ray.origin - a;
  const double u = dot(s, p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qv = cross(s, e1);
  const double v = dot(ray.dir, qv) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = dot(e2, qv) * inv;
  if (t <= ray.t_min || t >= ray.t_max) return std::nullopt;
  bu = u;
  bv = v;
  return t;
}

namespace {

struct Box {
  Vec3 lo{1e300, 1e300, 1e300};
  Vec3 hi{-1e300, -1e300, -1e300};
  void grow(const Point3& p) {
    lo = min(lo, p);
    hi = max(hi, p);
  }
  void grow(const Box& b) {
    lo = min(lo, b.lo);
    hi = max(hi, b.hi);
  }
  Vec3 center() const { return (lo + hi) * 0.5; }
};

Box unit_box(const Scene& scene, const Scene::AccelUnit& u) {
  const Primitive& p = scene.primitives[static_cast<std::size_t>(u.primitive)];
  Box b;
  switch (p.kind) {
    case ShapeKind::sphere: {
      const Vec3 r{p.sphere.radius, p.sphere.radius, p.sphere.radius};
      b.grow(p.sphere.center - r);
      b.grow(p.sphere.center + r);
      break;
    }
    case ShapeKind::quad:
      b.grow(p.quad.corner);
      b.grow(p.quad.corner + p.quad.e1);
      b.grow(p.quad.corner + p.quad.e2);
      b.grow(p.quad.corner + p.quad.e1 + p.quad.e2);
      break;
    case ShapeKind::mesh: {
      const MeshTri& t = p.tris[static_cast<std::size_t>(u.tri)];
      b.grow(p.vertices[static_cast<std::size_t>(t.v0)]);
      b.grow(p.vertices[static_cast<std::size_t>(t.v1)]);
      b.grow(p.vertices[static_cast<std::size_t>(t.v2)]);
      break;
    }
  }
  return b;
}

constexpr int kLeafSize = 4;

int build_node(Scene& scene, std::vector<Box>& boxes, int first, int count) {
  Box bounds;
  for (int i = first; i < first + count; ++i)
    bounds.grow(boxes[static_cast<std::size_t>(i)]);

  const int node_index = static_cast<int>(scene.accel_nodes.size());
  scene.accel_nodes.push_back({});
  scene.accel_nodes.back().box_min = bounds.lo;
  scene.accel_nodes.back().box_max = bounds.hi;

  if (count <= kLeafSize) {
    scene.accel_nodes[static_cast<std::size_t>(node_index)].first = first;
    scene.accel_nodes[static_cast<std::size_t>(node_index)].count = count;
    return node_index;
  }

  const Vec3 extent = bounds.hi - bounds.lo;
  int axis = 0;
  if (extent.y > extent.x) axis = 1;
  if (extent.z > (axis == 0 ? extent.x : extent.y)) axis = 2;
  auto key = [axis](const Box& b) {
    const Vec3 c = b.center();
    return axis == 0 ? c.x : axis == 1 ? c.y : c.z;
  };

  // Median split; ties broken by the unit's position to keep builds stable.
  std::vector<int> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), first);
  const auto mid = order.begin() + count / 2;
  std::nth_element(order.begin(), mid, order.end(), [&](int a, int b) {
    const double ka = key(boxes[static_cast<std::size_t>(a)]);
    const double kb = key(boxes[static_cast<std::size_t>(b)]);
    return ka != kb ? ka < kb : a < b;
  });
  std::sort(order.begin(), mid, [](int a, int b) { return a < b; });
  std::sort(mid, order.end(), [](int a, int b) { return a < b; });

  std::vector<Scene::AccelUnit> tmp_units(static_cast<std::size_t>(count));
  std::vector<Box> tmp_boxes(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    tmp_units[static_cast<std::size_t>(i)] =
        scene.accel_units[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    tmp_boxes[static_cast<std::size_t>(i)] =
        boxes[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  }
  std::copy(tmp_units.begin(), tmp_units.end(),
            scene.accel_units.begin() + first);
  std::copy(tmp_boxes.begin(), tmp_boxes.end(), boxes.begin() + first);

  const int half = count / 2;
  const int left = build_node(scene, boxes, first, half);
  const int right = build_node(scene, boxes, first + half, count - half);
  scene.accel_nodes[static_cast<std::size_t>(node_index)].left = left;
  scene.accel_nodes[static_cast<std::size_t>(node_index)].right = right;
  return node_index;
}

bool hit_box(const Scene::AccelNode& n, const Ray& ray, double t_best) {
  double t0 = ray.t_min, t1 = std::min(ray.t_max, t_best);
  auto slab = [&](double lo, double hi, double o, double d) {
    if (d == 0.0) return o >= lo && o <= hi;
    double near = (lo - o) / d;
    double far = (hi - o) / d;
    if (near > far) std::swap(near, far);
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    return t0 <= t1;
  };
  return slab(n.box_min.x, n.box_max.x, ray.origin.x, ray.dir.x) &&
         slab(n.box_min.y, n.box_max.y, ray.origin.y, ray.dir.y) &&
         slab(n.box_min.z, n.box_max.z, ray.origin.z, ray.dir.z);
}

void fill_hit(const Scene& scene, const Ray& ray, const Scene::AccelUnit& unit,
              double t, double bu, double bv, Hit& hit) {
  const Primitive& prim = scene.primitives[static_cast<std::size_t>(unit.primitive)];
  hit.t = t;
  hit.point = ray.origin + ray.dir * t;
  hit.primitive = unit.primitive;
  hit.material = prim.material;
  hit.emitter = prim.emitter;

  Normal3 outward;
  Normal3 shading;
  switch (prim.kind) {
    case ShapeKind::sphere:
      outward = (hit.point - prim.sphere.center) * (1.0 / prim.sphere.radius);
      shading = outward;
      break;
    case ShapeKind::quad:
      outward = normalize(cross(prim.quad.e1, prim.quad.e2));
      shading = outward;
      break;
    case ShapeKind::mesh: {
      const MeshTri& tr = prim.tris[static_cast<std::size_t>(unit.tri)];
      const Point3& a = prim.vertices[static_cast<std::size_t>(tr.v0)];
      const Point3& b = prim.vertices[static_cast<std::size_t>(tr.v1)];
      const Point3& c = prim.vertices[static_cast<std::size_t>(tr.v2)];
      outward = normalize(cross(b - a, c - a));
      if (tr.n0 >= 0 && tr.n1 >= 0 && tr.n2 >= 0) {
        shading = normalize(prim.normals[static_cast<std::size_t>(tr.n0)] * (1.0 - bu - bv) +
                            prim.normals[static_cast<std::size_t>(tr.n1)] * bu +
                            prim.normals[static_cast<std::size_t>(tr.n2)] * bv);
      } else {
        shading = outward;
      }
      break;
    }
  }
  hit.front_face = dot(ray.dir, outward) < 0.0;
  hit.geom_normal = hit.front_face ? outward : -outward;
  if (dot(shading, hit.geom_normal) < 0.0) shading = -shading;
  hit.shading_normal = shading;
}

} // namespace

void build_accel(Scene& scene) {
  scene.accel_nodes.clear();
  scene.accel_units.clear();
  for (int p = 0; p < static_cast<int>(scene.primitives.size()); ++p) {
    const Primitive& prim = scene.primitives[static_cast<std::size_t>(p)];
    if (prim.kind == ShapeKind::mesh) {
      for (int t = 0; t < static_cast<int>(prim.tris.size()); ++t)
        scene.accel_units.push_back({p, t});
    } else {
      scene.accel_units.push_back({p, -1});
    }
  }
  if (scene.accel_units.empty()) return;
  std::vector<Box> boxes(scene.accel_units.size());
  for (std::size_t i = 0; i < boxes.size(); ++i)
    boxes[i] = unit_box(scene, scene.accel_units[i]);
  scene.accel_nodes.reserve(2 * scene.accel_units.size());
  build_node(scene, boxes, 0, static_cast<int>(scene.accel_units.size()));
}

std::optional<Hit> intersect(const Scene& scene, const Ray& ray) {
  if (scene.accel_nodes.empty()) return std::nullopt;

  double t_best = ray.t_max;
  Scene::AccelUnit best_unit;
  double best_bu = 0.0, best_bv = 0.0;
  bool found = false;

  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Scene::AccelNode& node = scene.accel_nodes[static_cast<std::size_t>(stack[--top])];
    if (!hit_box(node, ray, t_best)) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const Scene::AccelUnit& unit = scene.accel_units[static_cast<std::size_t>(i)];
        const Primitive& prim = scene.primitives[static_cast<std::size_t>(unit.primitive)];
        Ray limited = ray;
        limited.t_max = t_best;
        std::optional<double> t;
        double bu = 0.0, bv = 0.0;
        switch (prim.kind) {
          case ShapeKind::sphere:
            t = intersect_sphere(prim.sphere, limited);
            break;
          case ShapeKind::quad:
            t = intersect_quad(prim.quad, limited);
            break;
          case ShapeKind::mesh: {
            const MeshTri& tr = prim.tris[static_cast<std::size_t>(unit.tri)];
            t = intersect_triangle(prim.vertices[static_cast<std::size_t>(tr.v0)],
                                   prim.vertices[static_cast<std::size_t>(tr.v1)],
                                   prim.vertices[static_cast<std::size_t>(tr.v2)],
                                   limited, bu, bv);
            break;
          }
        }
        if (t && *t < t_best) {
          t_best = *t;
          best_unit = unit;
          best_bu = bu;
          best_bv = bv;
          found = true;
        }
      }
    } else {
      // Fixed traversal order keeps results independent of thread count.
      stack[top++] = node.right;
      stack[top++] = node.left;
    }
  }
  if (!found) return std::nullopt;
  Hit hit;
  fill_hit(scene, ray, best_unit, t_best, best_bu, best_bv, hit);
  return hit;
}

bool occluded(const Scene& scene, const Point3& a, const Point3& b) {
  const Vec3 d = b - a;
  const double dist = length(d);
  if (dist == 0.0) return false;
  Ray ray;
  ray.origin = a;
  ray.dir = d * (1.0 / dist);
  ray.t_min = kShadowEps * dist;
  ray.t_max = (1.0 - kShadowEps) * dist;
  return intersect(scene, ray).has_value();
}

double primitive_area(const Primitive& prim) {
  switch (prim.kind) {
    case ShapeKind::sphere:
      return 4.0 * kPi * prim.sphere.radius * prim.sphere.radius;
    case ShapeKind::quad:
      return length(cross(prim.quad.e1, prim.quad.e2));
    case ShapeKind::mesh: {
      double area = 0.0;
      for (const MeshTri& t : prim.tris) {
        const Point3& a = prim.vertices[static_cast<std::size_t>(t.v0)];
        const Point3& b = prim.vertices[static_cast<std::size_t>(t.v1)];
        const Point3& c = prim.vertices[static_cast<std::size_t>(t.v2)];
        area += 0.5 * length(cross(b - a, c - a));
      }
      return area;
    }
  }
  return 0.0;
}

double bounding_radius(const Scene& scene) {
  if (scene.primitives.empty())
    throw std::invalid_argument("bounding_radius: scene has no primitives");
  Box box;
  bool any = false;
  for (int pass = 0; pass < 2 && !any; ++pass) {
    for (const Primitive& prim : scene.primitives) {
      // First pass skips pure emitters; fall back to everything if that
      // leaves the box empty.
      if (pass == 0 && prim.emitter >= 0) continue;
      any = true;
      Scene::AccelUnit u{0, -1};
      u.primitive = static_cast<int>(&prim - scene.primitives.data());
      if (prim.kind == ShapeKind::mesh) {
        for (const Point3& v : prim.vertices) box.grow(v);
      } else {
        const Box b = unit_box(scene, u);
        box.grow(b);
      }
    }
  }
  return 0.5 * length(box.hi - box.lo);
}

} // namespace fppm
