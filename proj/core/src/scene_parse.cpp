#include "fppm/scene.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace fppm {
namespace {

struct Value {
  enum Kind { scalar, tuple, string } kind = string;
  double s = 0.0;
  Vec3 v;
  std::string text;
};

// Cursor over one line. Column numbers are 1-based for error messages.
struct LineCursor {
  const std::string& file;
  int line_no;
  const std::string& line;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << file << ":" << line_no << ":" << pos + 1 << ": " << msg;
    throw ParseError(os.str());
  }
  void skip_ws() {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
  }
  bool at_end() {
    skip_ws();
    return pos >= line.size() || line[pos] == '#';
  }
  std::string ident() {
    skip_ws();
    const std::size_t start = pos;
    while (pos < line.size() && (std::isalnum(static_cast<unsigned char>(line[pos])) ||
                                 line[pos] == '_'))
      ++pos;
    if (pos == start) fail("expected an identifier");
    return line.substr(start, pos - start);
  }
  double scalar() {
    skip_ws();
    double out = 0.0;
    const char* begin = line.data() + pos;
    const char* end = line.data() + line.size();
    const auto res = std::from_chars(begin, end, out);
    if (res.ec != std::errc{}) fail("expected a number");
    if (!std::isfinite(out)) fail("number is not finite");
    pos = static_cast<std::size_t>(res.ptr - line.data());
    return out;
  }
  void expect(char c) {
    skip_ws();
    if (pos >= line.size() || line[pos] != c)
      fail(std::string("expected '") + c + "'");
    ++pos;
  }
  Value value() {
    skip_ws();
    Value out;
    if (pos < line.size() && line[pos] == '(') {
      ++pos;
      out.kind = Value::tuple;
      out.v.x = scalar();
      expect(',');
      out.v.y = scalar();
      expect(',');
      out.v.z = scalar();
      expect(')');
      return out;
    }
    const std::size_t start = pos;
    while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos])))
      ++pos;
    if (pos == start) fail("expected a value");
    out.text = line.substr(start, pos - start);
    double d = 0.0;
    const auto res = std::from_chars(out.text.data(), out.text.data() + out.text.size(), d);
    if (res.ec == std::errc{} && res.ptr == out.text.data() + out.text.size()) {
      if (!std::isfinite(d)) fail("number is not finite");
      out.kind = Value::scalar;
      out.s = d;
    }
    return out;
  }
};

// key=value pairs for the remainder of a line, keys must be unique.
std::map<std::string, Value> parse_kvs(LineCursor& cur) {
  std::map<std::string, Value> kvs;
  while (!cur.at_end()) {
    const std::string key = cur.ident();
    cur.expect('=');
    if (!kvs.emplace(key, cur.value()).second) cur.fail("duplicate key '" + key + "'");
  }
  return kvs;
}

struct KvSet {
  LineCursor& cur;
  std::map<std::string, Value> kvs;

  Value take(const std::string& key) {
    const auto it = kvs.find(key);
    if (it == kvs.end()) cur.fail("missing key '" + key + "'");
    Value v = it->second;
    kvs.erase(it);
    return v;
  }
  std::optional<Value> take_opt(const std::string& key) {
    const auto it = kvs.find(key);
    if (it == kvs.end()) return std::nullopt;
    Value v = it->second;
    kvs.erase(it);
    return v;
  }
  double number(const std::string& key) {
    const Value v = take(key);
    if (v.kind != Value::scalar) cur.fail("'" + key + "' must be a number");
    return v.s;
  }
  Vec3 tuple(const std::string& key) {
    const Value v = take(key);
    if (v.kind != Value::tuple) cur.fail("'" + key + "' must be a (x,y,z) tuple");
    return v.v;
  }
  std::string string(const std::string& key) {
    const Value v = take(key);
    if (v.kind == Value::tuple) cur.fail("'" + key + "' must be a string");
    return v.text.empty() ? format_scalar(v.s) : v.text;
  }
  void done() {
    if (!kvs.empty()) cur.fail("unknown key '" + kvs.begin()->first + "'");
  }

  static std::string format_scalar(double d) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
  }
};

Rgb to_rgb(const Vec3& v) { return {v.x, v.y, v.z}; }

void check_unit_range(LineCursor& cur, const Rgb& c, const std::string& what) {
  if (c.r < 0.0 || c.r > 1.0 || c.g < 0.0 || c.g > 1.0 || c.b < 0.0 || c.b > 1.0)
    cur.fail(what + " components must be in [0,1]");
}

void check_non_negative(LineCursor& cur, const Rgb& c, const std::string& what) {
  if (c.r < 0.0 || c.g < 0.0 || c.b < 0.0) cur.fail(what + " must be non-negative");
}

std::string join_path(const std::string& base, const std::string& rel) {
  if (base.empty() || rel.empty() || rel.front() == '/') return rel;
  return base.back() == '/' ? base + rel : base + "/" + rel;
}

// OBJ subset: v, vn and f records; faces triangulated as fans. Indices are
// 1-based, negative indices count from the end as usual.
void load_obj(const std::string& path, Primitive& prim, LineCursor& cur) {
  std::ifstream in(path);
  if (!in) cur.fail("cannot open obj file '" + path + "'");
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    std::ostringstream os;
    os << path << ":" << line_no << ": " << msg;
    throw ParseError(os.str());
  };
  auto resolve = [&](long idx, std::size_t count) -> int {
    if (idx < 0) idx += static_cast<long>(count) + 1;
    if (idx < 1 || idx > static_cast<long>(count)) fail("index out of range");
    return static_cast<int>(idx - 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream is(line);
    std::string tag;
    if (!(is >> tag) || tag[0] == '#') continue;
    if (tag == "v" || tag == "vn") {
      double x, y, z;
      if (!(is >> x >> y >> z)) fail("expected three coordinates");
      if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
        fail("coordinate is not finite");
      if (tag == "v")
        prim.vertices.push_back({x, y, z});
      else
        prim.normals.push_back({x, y, z});
    } else if (tag == "f") {
      std::vector<int> vi, ni;
      std::string corner;
      while (is >> corner) {
        // v, v//vn or v/vt/vn
        long v = 0, n = 0;
        bool has_n = false;
        const auto s1 = corner.find('/');
        v = std::strtol(corner.c_str(), nullptr, 10);
        if (s1 != std::string::npos) {
          const auto s2 = corner.find('/', s1 + 1);
          if (s2 != std::string::npos && s2 + 1 < corner.size()) {
            n = std::strtol(corner.c_str() + s2 + 1, nullptr, 10);
            has_n = true;
          }
        }
        if (v == 0) fail("bad face corner '" + corner + "'");
        vi.push_back(resolve(v, prim.vertices.size()));
        ni.push_back(has_n ? resolve(n, prim.normals.size()) : -1);
      }
      if (vi.size() < 3) fail("face needs at least 3 vertices");
      for (std::size_t k = 2; k < vi.size(); ++k)
        prim.tris.push_back({vi[0], vi[k - 1], vi[k], ni[0], ni[k - 1], ni[k]});
    }
    // Any other tag (vt, o, g, s, usemtl, mtllib) is ignored.
  }
  if (prim.tris.empty()) fail("obj file contains no faces");
}

void attach_area_emitter(Scene& scene, int prim_index, const Rgb& radiance,
                         LineCursor& cur) {
  Primitive& prim = scene.primitives[static_cast<std::size_t>(prim_index)];
  if (prim.kind == ShapeKind::mesh) cur.fail("area emitters attach to quads and spheres only");
  if (prim.emitter >= 0) cur.fail("shape '" + prim.name + "' already emits");
  Emitter e;
  e.kind = EmitterKind::area;
  e.primitive = prim_index;
  e.radiance = radiance;
  prim.emitter = static_cast<int>(scene.emitters.size());
  scene.emitters.push_back(e);
}

} // namespace

Scene parse_scene(const std::string& text, const std::string& base_dir,
                  const std::string& file_label) {
  Scene scene;
  std::map<std::string, int> material_index;
  std::map<std::string, int> primitive_index;
  int shape_counts[3] = {0, 0, 0};

  auto add_primitive = [&](Primitive prim) {
    const char* base[] = {"sphere", "quad", "mesh"};
    const int k = static_cast<int>(prim.kind);
    prim.name = base[k] + std::to_string(shape_counts[k]++);
    primitive_index[prim.name] = static_cast<int>(scene.primitives.size());
    scene.primitives.push_back(std::move(prim));
  };
  auto resolve_material = [&](KvSet& kv) {
    const std::string name = kv.string("material");
    const auto it = material_index.find(name);
    if (it == material_index.end()) kv.cur.fail("unknown material '" + name + "'");
    return it->second;
  };

  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    LineCursor cur{file_label, line_no, line};
    if (cur.at_end()) continue;
    const std::string keyword = cur.ident();

    if (keyword == "camera") {
      KvSet kv{cur, parse_kvs(cur)};
      Camera c;
      c.position = kv.tuple("pos");
      c.look_at = kv.tuple("look");
      c.up = kv.tuple("up");
      c.vfov_deg = kv.number("fov");
      const std::string res = kv.string("res");
      kv.done();
      int w = 0, h = 0;
      if (std::sscanf(res.c_str(), "%dx%d", &w, &h) != 2)
        cur.fail("res must look like 640x480");
      if (w < 1 || h < 1) cur.fail("resolution must be at least 1x1");
      if (!(c.vfov_deg > 0.0 && c.vfov_deg < 180.0)) cur.fail("fov must be in (0,180)");
      if (length(cross(c.look_at - c.position, c.up)) == 0.0)
        cur.fail("up is parallel to the view direction");
      c.width = w;
      c.height = h;
      scene.camera = c;
      scene.has_camera = true;
    } else if (keyword == "material") {
      Material m;
      m.name = cur.ident();
      if (material_index.count(m.name)) cur.fail("duplicate material '" + m.name + "'");
      const std::string kind = cur.ident();
      KvSet kv{cur, parse_kvs(cur)};
      if (kind == "lambertian") {
        m.kind = MaterialKind::lambertian;
        m.albedo = to_rgb(kv.tuple("albedo"));
        check_unit_range(cur, m.albedo, "albedo");
      } else if (kind == "mirror") {
        m.kind = MaterialKind::mirror;
        m.reflectance = to_rgb(kv.tuple("refl"));
        check_unit_range(cur, m.reflectance, "refl");
      } else if (kind == "dielectric") {
        m.kind = MaterialKind::dielectric;
        m.ior = kv.number("ior");
        if (!(m.ior > 1.0)) cur.fail("ior must exceed 1");
        if (const auto t = kv.take_opt("tint")) {
          if (t->kind != Value::tuple) cur.fail("'tint' must be a (x,y,z) tuple");
          m.tint = to_rgb(t->v);
          check_unit_range(cur, m.tint, "tint");
        }
      } else if (kind == "phong") {
        m.kind = MaterialKind::phong;
        m.diffuse = to_rgb(kv.tuple("diffuse"));
        m.specular = to_rgb(kv.tuple("specular"));
        m.exponent = kv.number("exp");
        check_unit_range(cur, m.diffuse, "diffuse");
        check_unit_range(cur, m.specular, "specular");
        if (m.diffuse.r + m.specular.r > 1.0 || m.diffuse.g + m.specular.g > 1.0 ||
            m.diffuse.b + m.specular.b > 1.0)
          cur.fail("phong diffuse+specular must not exceed 1 per channel");
        if (!(m.exponent >= 1.0)) cur.fail("exp must be at least 1");
      } else {
        cur.fail("unknown material kind '" + kind + "'");
      }
      kv.done();
      material_index[m.name] = static_cast<int>(scene.materials.size());
      scene.materials.push_back(std::move(m));
    } else if (keyword == "sphere") {
      KvSet kv{cur, parse_kvs(cur)};
      Primitive prim;
      prim.kind = ShapeKind::sphere;
      prim.sphere.center = kv.tuple("center");
      prim.sphere.radius = kv.number("radius");
      if (!(prim.sphere.radius > 0.0)) cur.fail("radius must be positive");
      prim.material = resolve_material(kv);
      const auto emit = kv.take_opt("emit");
      kv.done();
      add_primitive(std::move(prim));
      if (emit) {
        if (emit->kind != Value::tuple) cur.fail("'emit' must be a (x,y,z) tuple");
        check_non_negative(cur, to_rgb(emit->v), "emit");
        attach_area_emitter(scene, static_cast<int>(scene.primitives.size()) - 1,
                            to_rgb(emit->v), cur);
      }
    } else if (keyword == "quad") {
      KvSet kv{cur, parse_kvs(cur)};
      Primitive prim;
      prim.kind = ShapeKind::quad;
      prim.quad.corner = kv.tuple("corner");
      prim.quad.e1 = kv.tuple("e1");
      prim.quad.e2 = kv.tuple("e2");
      const double area = length(cross(prim.quad.e1, prim.quad.e2));
      if (area <= 1e-12 * length(prim.quad.e1) * length(prim.quad.e2))
        cur.fail("quad edges are parallel");
      prim.material = resolve_material(kv);
      const auto emit = kv.take_opt("emit");
      kv.done();
      add_primitive(std::move(prim));
      if (emit) {
        if (emit->kind != Value::tuple) cur.fail("'emit' must be a (x,y,z) tuple");
        check_non_negative(cur, to_rgb(emit->v), "emit");
        attach_area_emitter(scene, static_cast<int>(scene.primitives.size()) - 1,
                            to_rgb(emit->v), cur);
      }
    } else if (keyword == "mesh") {
      KvSet kv{cur, parse_kvs(cur)};
      Primitive prim;
      prim.kind = ShapeKind::mesh;
      prim.obj_path = kv.string("obj");
      prim.material = resolve_material(kv);
      kv.done();
      load_obj(join_path(base_dir, prim.obj_path), prim, cur);
      add_primitive(std::move(prim));
    } else if (keyword == "arealight") {
      KvSet kv{cur, parse_kvs(cur)};
      const std::string shape = kv.string("shape");
      const Rgb radiance = to_rgb(kv.tuple("radiance"));
      kv.done();
      check_non_negative(cur, radiance, "radiance");
      const auto it = primitive_index.find(shape);
      if (it == primitive_index.end()) cur.fail("unknown shape '" + shape + "'");
      attach_area_emitter(scene, it->second, radiance, cur);
    } else if (keyword == "pointlight") {
      KvSet kv{cur, parse_kvs(cur)};
      Emitter e;
      e.kind = EmitterKind::point;
      e.position = kv.tuple("pos");
      e.intensity = to_rgb(kv.tuple("intensity"));
      kv.done();
      check_non_negative(cur, e.intensity, "intensity");
      scene.emitters.push_back(e);
    } else if (keyword == "spotlight") {
      KvSet kv{cur, parse_kvs(cur)};
      Emitter e;
      e.kind = EmitterKind::spot;
      e.position = kv.tuple("pos");
      e.direction = kv.tuple("dir");
      e.cone_angle_deg = kv.number("angle");
      e.intensity = to_rgb(kv.tuple("intensity"));
      const auto tex = kv.take_opt("texture");
      kv.done();
      check_non_negative(cur, e.intensity, "intensity");
      if (length(e.direction) == 0.0) cur.fail("dir must be nonzero");
      if (!(e.cone_angle_deg > 0.0 && e.cone_angle_deg <= 90.0))
        cur.fail("angle must be in (0,90] degrees");
      if (tex) {
        e.texture_path = tex->kind == Value::scalar ? KvSet::format_scalar(tex->s) : tex->text;
        if (e.texture_path.empty()) cur.fail("texture path is empty");
        try {
          e.texture = read_pfm(join_path(base_dir, e.texture_path));
        } catch (const std::exception& err) {
          cur.fail(err.what());
        }
      }
      scene.emitters.push_back(std::move(e));
    } else {
      cur.fail("unknown keyword '" + keyword + "'");
    }
  }

  build_accel(scene);
  return scene;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open scene file");
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto slash = path.find_last_of('/');
  const std::string dir = slash == std::string::npos ? "" : path.substr(0, slash);
  return parse_scene(buf.str(), dir, path);
}

namespace {

void put(std::ostringstream& os, double d) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  os << buf;
}
void put(std::ostringstream& os, const Vec3& v) {
  os << '(';
  put(os, v.x);
  os << ',';
  put(os, v.y);
  os << ',';
  put(os, v.z);
  os << ')';
}
void put(std::ostringstream& os, const Rgb& c) { put(os, Vec3{c.r, c.g, c.b}); }

} // namespace

std::string serialize_scene(const Scene& scene) {
  std::ostringstream os;
  if (scene.has_camera) {
    const Camera& c = scene.camera;
    os << "camera pos=";
    put(os, c.position);
    os << " look=";
    put(os, c.look_at);
    os << " up=";
    put(os, c.up);
    os << " fov=";
    put(os, c.vfov_deg);
    os << " res=" << c.width << "x" << c.height << "\n";
  }
  for (const Material& m : scene.materials) {
    os << "material " << m.name << ' ';
    switch (m.kind) {
      case MaterialKind::lambertian:
        os << "lambertian albedo=";
        put(os, m.albedo);
        break;
      case MaterialKind::mirror:
        os << "mirror refl=";
        put(os, m.reflectance);
        break;
      case MaterialKind::dielectric:
        os << "dielectric ior=";
        put(os, m.ior);
        os << " tint=";
        put(os, m.tint);
        break;
      case MaterialKind::phong:
        os << "phong diffuse=";
        put(os, m.diffuse);
        os << " specular=";
        put(os, m.specular);
        os << " exp=";
        put(os, m.exponent);
        break;
    }
    os << "\n";
  }
  for (const Primitive& p : scene.primitives) {
    const Material& m = scene.materials[static_cast<std::size_t>(p.material)];
    switch (p.kind) {
      case ShapeKind::sphere:
        os << "sphere center=";
        put(os, p.sphere.center);
        os << " radius=";
        put(os, p.sphere.radius);
        break;
      case ShapeKind::quad:
        os << "quad corner=";
        put(os, p.quad.corner);
        os << " e1=";
        put(os, p.quad.e1);
        os << " e2=";
        put(os, p.quad.e2);
        break;
      case ShapeKind::mesh:
        os << "mesh obj=" << p.obj_path;
        break;
    }
    os << " material=" << m.name;
    if (p.emitter >= 0) {
      os << " emit=";
      put(os, scene.emitters[static_cast<std::size_t>(p.emitter)].radiance);
    }
    os << "\n";
  }
  for (const Emitter& e : scene.emitters) {
    if (e.kind == EmitterKind::point) {
      os << "pointlight pos=";
      put(os, e.position);
      os << " intensity=";
      put(os, e.intensity);
      os << "\n";
    } else if (e.kind == EmitterKind::spot) {
      os << "spotlight pos=";
      put(os, e.position);
      os << " dir=";
      put(os, e.direction);
      os << " angle=";
      put(os, e.cone_angle_deg);
      os << " intensity=";
      put(os, e.intensity);
      if (!e.texture_path.empty()) os << " texture=" << e.texture_path;
      os << "\n";
    }
  }
  return os.str();
}

} // namespace fppm
