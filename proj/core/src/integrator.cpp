#include "fppm/integrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <thread>
#include <utility>

#include "fppm/bsdf.hpp"
#include "fppm/path.hpp"
#include "fppm/photon_map.hpp"
#include "fppm/sampling.hpp"

namespace fppm {

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "pt") return Algorithm::pt;
  if (name == "bdpt") return Algorithm::bdpt;
  if (name == "sppm") return Algorithm::sppm;
  if (name == "cppm") return Algorithm::cppm;
  if (name == "fppm") return Algorithm::fppm;
  if (name == "vcm") return Algorithm::vcm;
  if (name == "vcm+") return Algorithm::vcm_plus;
  return std::nullopt;
}

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::pt: return "pt";
    case Algorithm::bdpt: return "bdpt";
    case Algorithm::sppm: return "sppm";
    case Algorithm::cppm: return "cppm";
    case Algorithm::fppm: return "fppm";
    case Algorithm::vcm: return "vcm";
    case Algorithm::vcm_plus: return "vcm+";
  }
  return "?";
}

namespace {

// Photons whose deposit normal strays more than 30 degrees from the gather
// normal are skipped: they reached the kernel disk through thin geometry and
// belong to a different surface.
constexpr double kNormalGuardCos = 0.86602540378443865;

constexpr std::uint64_t kLightStream = 0;
constexpr std::uint64_t kEyeStream = 1;

// Static contiguous split: fn(begin, end) runs on [begin, end). The partition
// depends only on (threads, count), never on scheduling, and every output
// slot is owned by exactly one index, so results are thread-count invariant.
template <typename F>
void parallel_ranges(int threads, std::size_t count, F&& fn) {
  const std::size_t t =
      std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(count, 1));
  if (t <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t - 1);
  for (std::size_t w = 1; w < t; ++w)
    pool.emplace_back(
        [&fn, w, t, count] { fn(count * w / t, count * (w + 1) / t); });
  fn(std::size_t{0}, count / t);
  for (std::thread& th : pool) th.join();
}

struct Splat {
  std::uint32_t pixel = 0;
  Rgb value;
};

bool is_chromatic(const Rgb& c) { return c.r != c.g || c.g != c.b; }

bool has_chromatic_emitter(const Scene& scene) {
  for (const Emitter& e : scene.emitters) {
    if (e.kind == EmitterKind::area) {
      if (is_chromatic(e.radiance)) return true;
    } else {
      if (is_chromatic(e.intensity)) return true;
      if (e.kind == EmitterKind::spot)
        for (const Rgb& t : e.texture.pixels)
          if (is_chromatic(t)) return true;
    }
  }
  return false;
}

class Renderer {
public:
  Renderer(const Scene& scene, const IntegratorConfig& config)
      : scene_(scene), cfg_(config) {
    if (!scene.has_camera)
      throw std::invalid_argument("render: scene has no camera");
    if (cfg_.iterations < 1)
      throw std::invalid_argument("render: iterations must be >= 1");
    if (cfg_.max_depth < 1)
      throw std::invalid_argument("render: max_depth must be >= 1");
    cam_ = make_camera_frame(scene.camera);
    npix_ = static_cast<std::size_t>(cam_.width) * cam_.height;
    if (cfg_.threads <= 0) {
      const unsigned hw = std::thread::hardware_concurrency();
      cfg_.threads = hw ? static_cast<int>(hw) : 1;
    }
    if (cfg_.light_paths == 0) cfg_.light_paths = npix_;

    const Algorithm a = cfg_.algorithm;
    merging_ = a == Algorithm::sppm || a == Algorithm::cppm ||
               a == Algorithm::fppm || a == Algorithm::vcm ||
               a == Algorithm::vcm_plus;
    bidirectional_ = a == Algorithm::bdpt || a == Algorithm::vcm ||
                     a == Algorithm::vcm_plus;
    test_driven_ = a == Algorithm::cppm || a == Algorithm::fppm ||
                   a == Algorithm::vcm_plus;

    if (merging_) {
      if (cfg_.r0_frac < 1e-4 || cfg_.r0_frac > 1e-2)
        std::cerr << "warning: initial radius fraction " << cfg_.r0_frac
                  << " is outside the usual [0.0001, 0.01] range\n";
      r1_ = cfg_.r0_frac * bounding_radius(scene);
      if (cfg_.schedule.r_min_base <= 0)
        cfg_.schedule.r_min_base = 0.001 * r1_;
    }
    if (cfg_.test.channels == TestChannels::auto_detect)
      cfg_.test.channels = has_chromatic_emitter(scene) ? TestChannels::rgb
                                                        : TestChannels::luminance;

    const bool vm_active = a == Algorithm::vcm || a == Algorithm::vcm_plus;
    base_ctx_ = MisContext{1, vm_active ? static_cast<int>(cfg_.light_paths) : 0,
                           cfg_.mis_beta, 0.0};

    if (test_driven_)
      regions_.assign(npix_, GatherRegion(cfg_.test, cfg_.schedule, r1_));
    estimate_.resize(npix_);
    vc_add_.resize(npix_);
    vm_add_.resize(npix_);
  }

  int width() const { return cam_.width; }
  int height() const { return cam_.height; }
  std::size_t pixel_count() const { return npix_; }
  const IterationReport& report() const { return report_; }
  const std::vector<double>& vc_added() const { return vc_add_; }
  const std::vector<double>& vm_added() const { return vm_add_; }

  const std::vector<Rgb>& step(std::uint64_t iteration) {
    const auto t0 = std::chrono::steady_clock::now();
    const Algorithm a = cfg_.algorithm;
    std::fill(estimate_.begin(), estimate_.end(), Rgb{});
    std::fill(vc_add_.begin(), vc_add_.end(), 0.0);
    std::fill(vm_add_.begin(), vm_add_.end(), 0.0);
    report_ = IterationReport{};
    report_.iteration = iteration;

    double r_max = 0.0;
    if (test_driven_) {
      for (const GatherRegion& g : regions_) r_max = std::max(r_max, g.radius());
    } else if (merging_) {
      radius_now_ = schedule_radius(r1_, cfg_.schedule.alpha, iteration);
      r_max = radius_now_;
    }

    if (a != Algorithm::pt) {
      MisContext light_ctx = base_ctx_;
      if (a == Algorithm::vcm)
        light_ctx.eta_vm = base_ctx_.n_vm * kPi * radius_now_ * radius_now_;
      else if (a == Algorithm::vcm_plus)
        // Light sub-paths cannot know which pixel will merge with them, so
        // their densities assume the largest live radius of this iteration.
        light_ctx.eta_vm = base_ctx_.n_vm * kPi * r_max * r_max;
      light_phase(iteration, light_ctx, r_max);
    }

    if (test_driven_) {
      report_.radius.resize(npix_);
      report_.rejected.assign(npix_, 0);
    }

    parallel_ranges(cfg_.threads, npix_, [&](std::size_t begin, std::size_t end) {
      std::vector<std::uint32_t> query;
      for (std::size_t px = begin; px < end; ++px) {
        RngStream rng(cfg_.seed, iteration, px, kEyeStream);
        switch (cfg_.algorithm) {
          case Algorithm::pt:
            pixel_pt(px, rng);
            break;
          case Algorithm::bdpt:
          case Algorithm::vcm:
          case Algorithm::vcm_plus:
            pixel_bidir(iteration, px, rng, query);
            break;
          case Algorithm::sppm:
          case Algorithm::cppm:
          case Algorithm::fppm:
            pixel_pm(iteration, px, rng, query);
            break;
        }
      }
    });

    if (bidirectional_) {
      for (const std::vector<Splat>& per_path : splats_)
        for (const Splat& s : per_path) {
          estimate_[s.pixel] += s.value;
          vc_add_[s.pixel] += luminance(s.value);
        }
    }

    if (merging_ && !test_driven_) {
      // Global-schedule algorithms report the radius the next iteration uses.
      report_.radius.assign(
          npix_, schedule_radius(r1_, cfg_.schedule.alpha, iteration + 1));
      report_.rejected.assign(npix_, 0);
    }

    for (std::size_t px = 0; px < npix_; ++px) {
      report_.vc_luminance += vc_add_[px];
      report_.vm_luminance += vm_add_[px];
    }
    report_.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return estimate_;
  }

private:
  void light_phase(std::uint64_t iteration, const MisContext& light_ctx,
                   double cell_size) {
    paths_.resize(cfg_.light_paths);
    splats_.resize(cfg_.light_paths);
    const std::uint32_t light_depth = cfg_.max_depth - 1;

    parallel_ranges(
        cfg_.threads, cfg_.light_paths, [&](std::size_t begin, std::size_t end) {
          for (std::size_t j = begin; j < end; ++j) {
            RngStream rng(cfg_.seed, iteration, j, kLightStream);
            paths_[j] = trace_light_subpath(scene_, light_ctx,
                                            static_cast<std::uint32_t>(j),
                                            light_depth, rng);
            splats_[j].clear();
            if (bidirectional_)
              for (const LightVertex& v : paths_[j].vertices)
                if (v.depth + 1 <= cfg_.max_depth)
                  camera_connect(light_ctx, v, splats_[j]);
          }
        });

    std::size_t total = 0;
    for (const LightPath& p : paths_) total += p.vertices.size();
    std::vector<LightVertex> flat;
    flat.reserve(total);
    ranges_.resize(cfg_.light_paths);
    for (std::size_t j = 0; j < paths_.size(); ++j) {
      ranges_[j].first = static_cast<std::uint32_t>(flat.size());
      flat.insert(flat.end(), paths_[j].vertices.begin(), paths_[j].vertices.end());
      ranges_[j].second = static_cast<std::uint32_t>(flat.size());
    }
    if (merging_) {
      grid_ = PhotonGrid(std::move(flat), cell_size);
      photons_ = &grid_.vertices();
    } else {
      store_ = std::move(flat);
      photons_ = &store_;
    }
  }

  void camera_connect(const MisContext& ctx, const LightVertex& v,
                      std::vector<Splat>& out) const {
    const auto proj = project_to_camera(cam_, v.position);
    if (!proj) return;
    const Material& m = scene_.materials[static_cast<std::size_t>(v.material)];
    const Bsdf bsdf(m, v.shading_normal, v.wi, true);
    double pdf_to_cam = 0, pdf_rev = 0;
    const Rgb f = bsdf.eval(proj->to_camera, pdf_to_cam, pdf_rev);
    if (f.is_black()) return;
    if (occluded(scene_, v.position, cam_.position)) return;

    const double cos_v = std::abs(dot(v.shading_normal, proj->to_camera));
    const double dist2 = proj->dist * proj->dist;
    const double camera_pdf_a = proj->pdf_w * cos_v / dist2;
    const double n_paths = static_cast<double>(cfg_.light_paths);
    const double w = mis_weight_camera_connect(
        ctx, v.mis, camera_pdf_a, pdf_rev * bsdf.continuation_prob(), n_paths);

    // Importance of the pixel footprint: solid-angle density of the camera
    // ray times the projection onto the surface, averaged over J paths.
    const Rgb value =
        v.throughput * f * (w * proj->pdf_w * cos_v / (dist2 * n_paths));
    if (value.is_black()) return;
    const int x = std::min(cam_.width - 1,
                           std::max(0, static_cast<int>(proj->sx)));
    const int y = std::min(cam_.height - 1,
                           std::max(0, static_cast<int>(proj->sy)));
    out.push_back(
        {static_cast<std::uint32_t>(y) * static_cast<std::uint32_t>(cam_.width) +
             static_cast<std::uint32_t>(x),
         value});
  }

  // Unidirectional path tracing: bsdf sampling combined with one light sample
  // per bounce. Self-contained so the baseline carries none of the partials
  // bookkeeping of the bidirectional walks.
  void pixel_pt(std::size_t px, RngStream& rng) {
    const double sx = static_cast<double>(px % cam_.width) + rng.next_double();
    const double sy = static_cast<double>(px / cam_.width) + rng.next_double();
    Ray ray = make_camera_ray(cam_, sx, sy);
    Rgb throughput{1.0, 1.0, 1.0};
    Rgb out;
    double prev_pdf_w = 0;
    bool prev_delta = true;
    Point3 prev_pos = cam_.position;
    const std::size_t n_emitters = scene_.emitters.size();
    const double pick_prob =
        n_emitters ? 1.0 / static_cast<double>(n_emitters) : 0.0;

    for (std::uint32_t depth = 1; depth <= cfg_.max_depth; ++depth) {
      const auto hit = intersect(scene_, ray);
      if (!hit) break;
      const Vec3 wo = -ray.dir;

      if (hit->emitter >= 0 && hit->front_face) {
        const Emitter& em = scene_.emitters[static_cast<std::size_t>(hit->emitter)];
        double w = 1.0;
        if (depth > 1 && !prev_delta) {
          const auto hp = emitter_hit_pdfs(scene_, em, ray.dir, hit->geom_normal);
          if (hp) {
            const double d2 = length_squared(hit->point - prev_pos);
            const double cos_l = dot(hit->geom_normal, wo);
            const double p_nee = pick_prob * hp->direct_pdf_a * d2 / cos_l;
            const double pb = mis_pow(base_ctx_, prev_pdf_w);
            w = pb / (pb + mis_pow(base_ctx_, p_nee));
          }
        }
        out += throughput * em.radiance * w;
      }

      const Material& mat =
          scene_.materials[static_cast<std::size_t>(hit->material)];
      const Bsdf bsdf(mat, hit->shading_normal, wo, hit->front_face);

      if (!bsdf.is_delta_only() && n_emitters && depth + 1 <= cfg_.max_depth) {
        const std::size_t pick = std::min(
            n_emitters - 1,
            static_cast<std::size_t>(rng.next_double() * n_emitters));
        const auto ds = sample_direct(scene_, scene_.emitters[pick], hit->point, rng);
        if (ds && !ds->emitted.is_black()) {
          double pf = 0, pr = 0;
          const Rgb f = bsdf.eval(ds->to_light, pf, pr);
          const double cos_v = std::abs(dot(hit->shading_normal, ds->to_light));
          if (!f.is_black() && cos_v > 0 &&
              !occluded(scene_, hit->point,
                        hit->point + ds->to_light * ds->dist)) {
            const double p_l = pick_prob * ds->direct_pdf_w;
            double w = 1.0;
            if (!ds->delta_light) {
              const double pl = mis_pow(base_ctx_, p_l);
              w = pl / (pl + mis_pow(base_ctx_, pf * bsdf.continuation_prob()));
            }
            out += throughput * f * ds->emitted * (w * cos_v / p_l);
          }
        }
      }

      if (depth == cfg_.max_depth) break;
      const auto s = bsdf.sample(rng);
      if (!s || s->pdf_w <= 0.0 || s->weight.is_black()) break;
      double q = 1.0;
      if (depth >= kRouletteDepth) {
        q = bsdf.continuation_prob();
        if (rng.next_double() >= q) break;
      }
      prev_pdf_w = s->pdf_w * bsdf.continuation_prob();
      prev_delta = s->is_delta;
      prev_pos = hit->point;
      throughput = throughput * s->weight / q;
      ray = Ray{hit->point, s->dir};
    }
    estimate_[px] = out;
    vc_add_[px] = luminance(out);
  }

  // Shared gather: photons in the tangent-plane disk of radius r around the
  // hit, excluding other-surface deposits and over-deep full paths.
  template <typename PerPhoton>
  void gather_disk(const Point3& center, const Normal3& normal,
                   const TangentFrame& frame, double r, std::uint32_t eye_depth,
                   std::vector<std::uint32_t>& query, PerPhoton&& fn) {
    grid_.query_ball(center, r, query);
    const double r2 = r * r;
    for (const std::uint32_t id : query) {
      const LightVertex& p = (*photons_)[id];
      if (eye_depth + p.depth > cfg_.max_depth) continue;
      if (dot(p.shading_normal, normal) < kNormalGuardCos) continue;
      const UnifiedPoint y = map_to_unified(center, p.position, frame);
      if (y.u * y.u + y.v * y.v > r2) continue;
      fn(p, y);
    }
  }

  // Progressive photon mapping: follow the camera ray through the specular
  // chain, collect emitted radiance along it, and estimate everything else by
  // kernel density at the first rough surface.
  void pixel_pm(std::uint64_t iteration, std::size_t px, RngStream& rng,
                std::vector<std::uint32_t>& query) {
    const Algorithm a = cfg_.algorithm;
    GatherRegion* region = test_driven_ ? &regions_[px] : nullptr;
    const double r = test_driven_ ? region->radius() : radius_now_;
    const double sx = static_cast<double>(px % cam_.width) + rng.next_double();
    const double sy = static_cast<double>(px / cam_.width) + rng.next_double();
    Ray ray = make_camera_ray(cam_, sx, sy);
    Rgb throughput{1.0, 1.0, 1.0};
    Rgb out;
    double vc = 0, vm = 0;
    bool gathered = false;

    for (std::uint32_t depth = 1; depth <= cfg_.max_depth; ++depth) {
      const auto hit = intersect(scene_, ray);
      if (!hit) break;
      const Vec3 wo = -ray.dir;
      if (hit->emitter >= 0 && hit->front_face) {
        const Rgb c =
            throughput *
            scene_.emitters[static_cast<std::size_t>(hit->emitter)].radiance;
        out += c;
        vc += luminance(c);
      }
      const Material& mat =
          scene_.materials[static_cast<std::size_t>(hit->material)];
      const Bsdf bsdf(mat, hit->shading_normal, wo, hit->front_face);

      if (!bsdf.is_delta_only()) {
        TangentFrame frame;
        if (test_driven_) {
          region->move_to(hit->point, hit->shading_normal);
          frame = region->frame();
        } else {
          frame = build_tangent_frame(hit->shading_normal);
        }
        Rgb sum;
        gather_disk(hit->point, hit->shading_normal, frame, r, depth, query,
                    [&](const LightVertex& p, const UnifiedPoint& y) {
                      double pf = 0, pr = 0;
                      const Rgb f = bsdf.eval(p.wi, pf, pr);
                      const Rgb val = throughput * f * p.throughput;
                      sum += val;
                      if (test_driven_) region->accumulate({y, val});
                    });
        const Rgb c =
            sum / (kPi * r * r * static_cast<double>(cfg_.light_paths));
        out += c;
        vm += luminance(c);
        gathered = true;
        break;
      }

      if (depth == cfg_.max_depth) break;
      const auto s = bsdf.sample(rng);
      if (!s || s->pdf_w <= 0.0 || s->weight.is_black()) break;
      double q = 1.0;
      if (depth >= kRouletteDepth) {
        q = bsdf.continuation_prob();
        if (rng.next_double() >= q) break;
      }
      throughput = throughput * s->weight / q;
      ray = Ray{hit->point, s->dir};
    }

    estimate_[px] = out;
    vc_add_[px] = vc;
    vm_add_[px] = vm;

    if (test_driven_) {
      if (gathered) {
        const RadiusUpdate up = a == Algorithm::cppm
                                    ? region->chi2_end_iteration(iteration, cfg_.light_paths)
                                    : region->end_iteration(iteration, cfg_.light_paths);
        report_.radius[px] = up.radius;
        report_.rejected[px] = up.rejected ? 1 : 0;
      } else {
        // No gather point this iteration means no observation: the radius
        // holds and the pooled statistics stay as they were.
        report_.radius[px] = region->radius();
        report_.rejected[px] = 0;
      }
    }
  }

  // Bidirectional walk shared by bdpt, vcm and vcm+: emitted-light hits,
  // light sampling, connections to this pixel's light sub-path, and (for the
  // merging variants) kernel estimation at every rough eye vertex.
  void pixel_bidir(std::uint64_t iteration, std::size_t px, RngStream& rng,
                   std::vector<std::uint32_t>& query) {
    const Algorithm a = cfg_.algorithm;
    GatherRegion* region = a == Algorithm::vcm_plus ? &regions_[px] : nullptr;
    const double r = !merging_ ? 0.0
                     : a == Algorithm::vcm_plus ? region->radius()
                                                : radius_now_;
    MisContext ctx = base_ctx_;
    if (merging_) ctx.eta_vm = base_ctx_.n_vm * kPi * r * r;
    const double vm_norm =
        merging_ ? 1.0 / (kPi * r * r * static_cast<double>(cfg_.light_paths))
                 : 0.0;

    const double sx = static_cast<double>(px % cam_.width) + rng.next_double();
    const double sy = static_cast<double>(px / cam_.width) + rng.next_double();
    const EyePath eye = trace_eye_subpath(
        cam_, sx, sy, ctx, rng);
    Rgb out;
    double vc = 0, vm = 0;
    const std::size_t n_emitters = scene_.emitters.size();
    const double pick_prob =
        n_emitters ? 1.0 / static_cast<double>(n_emitters) : 0.0;
    const auto [lbegin, lend] = ranges_[px % ranges_.size()];
    bool primary_seen = false;

    for (const PathVertex& v : eye.vertices) {
      if (v.emitter >= 0 && v.front_face) {
        const Emitter& em = scene_.emitters[static_cast<std::size_t>(v.emitter)];
        double w = 1.0;
        if (v.depth > 1) {
          const auto hp = emitter_hit_pdfs(scene_, em, -v.wo, v.geom_normal);
          w = hp ? mis_weight_emitter_hit(ctx, v.mis,
                                          pick_prob * hp->direct_pdf_a,
                                          pick_prob * hp->emission_pdf)
                 : 0.0;
        }
        const Rgb c = v.throughput * em.radiance * w;
        out += c;
        vc += luminance(c);
      }
      if (v.is_delta) continue;

      const Material& mat = scene_.materials[static_cast<std::size_t>(v.material)];
      const Bsdf bsdf(mat, v.shading_normal, v.wo, v.front_face);
      const double cont = bsdf.continuation_prob();

      if (n_emitters && v.depth + 1 <= cfg_.max_depth) {
        const std::size_t pick = std::min(
            n_emitters - 1,
            static_cast<std::size_t>(rng.next_double() * n_emitters));
        const auto ds = sample_direct(scene_, scene_.emitters[pick], v.position, rng);
        if (ds && !ds->emitted.is_black()) {
          double pf = 0, pr = 0;
          const Rgb f = bsdf.eval(ds->to_light, pf, pr);
          const double cos_v = std::abs(dot(v.shading_normal, ds->to_light));
          if (!f.is_black() && cos_v > 0 &&
              !occluded(scene_, v.position,
                        v.position + ds->to_light * ds->dist)) {
            const double w = mis_weight_nee(
                ctx, v.mis, pf * cont, pr * cont, pick_prob * ds->direct_pdf_w,
                pick_prob * ds->emission_pdf, ds->cos_at_light, cos_v,
                ds->delta_light);
            const Rgb c = v.throughput * f * ds->emitted *
                          (w * cos_v / (pick_prob * ds->direct_pdf_w));
            out += c;
            vc += luminance(c);
          }
        }
      }

      for (std::uint32_t li = lbegin; li < lend; ++li) {
        const LightVertex& l = (*photons_)[li];
        if (v.depth + l.depth + 1 > cfg_.max_depth) continue;
        Vec3 d = l.position - v.position;
        const double d2 = length_squared(d);
        if (d2 == 0.0) continue;
        const double dist = std::sqrt(d2);
        d = d / dist;
        double epf = 0, epr = 0;
        const Rgb fe = bsdf.eval(d, epf, epr);
        if (fe.is_black()) continue;
        const Material& lmat =
            scene_.materials[static_cast<std::size_t>(l.material)];
        const Bsdf lbsdf(lmat, l.shading_normal, l.wi, true);
        double lpf = 0, lpr = 0;
        const Rgb fl = lbsdf.eval(-d, lpf, lpr);
        if (fl.is_black()) continue;
        if (occluded(scene_, v.position, l.position)) continue;
        const double lcont = lbsdf.continuation_prob();
        const double cos_e = std::abs(dot(v.shading_normal, d));
        const double cos_l = std::abs(dot(l.shading_normal, d));
        const double w = mis_weight_connect(
            ctx, v.mis, l.mis, epf * cont * cos_l / d2, epr * cont,
            lpf * lcont * cos_e / d2, lpr * lcont);
        const Rgb c = v.throughput * fe * fl * l.throughput *
                      (w * cos_e * cos_l / d2);
        out += c;
        vc += luminance(c);
      }

      if (merging_) {
        const bool primary = region && !primary_seen;
        primary_seen = true;
        TangentFrame frame;
        if (primary) {
          region->move_to(v.position, v.shading_normal);
          frame = region->frame();
        } else {
          frame = build_tangent_frame(v.shading_normal);
        }
        Rgb sum;
        gather_disk(v.position, v.shading_normal, frame, r, v.depth, query,
                    [&](const LightVertex& p, const UnifiedPoint& y) {
                      double pf = 0, pr = 0;
                      const Rgb f = bsdf.eval(p.wi, pf, pr);
                      const double w = mis_weight_merge(
                          ctx, v.mis, p.mis, pf * cont, pr * p.cont);
                      const Rgb val = v.throughput * f * p.throughput * w;
                      sum += val;
                      if (primary) region->accumulate({y, val});
                    });
        const Rgb c = sum * vm_norm;
        out += c;
        vm += luminance(c);
      }
    }

    estimate_[px] = out;
    vc_add_[px] = vc;
    vm_add_[px] = vm;

    if (region) {
      if (primary_seen) {
        const RadiusUpdate up = region->end_iteration(iteration, cfg_.light_paths);
        report_.radius[px] = up.radius;
        report_.rejected[px] = up.rejected ? 1 : 0;
      } else {
        report_.radius[px] = region->radius();
        report_.rejected[px] = 0;
      }
    }
  }

  EyePath trace_eye_subpath(const CameraFrame& cam, double sx, double sy,
                            const MisContext& ctx, RngStream& rng) const {
    return ::fppm::trace_eye_subpath(scene_, ctx, cam, sx, sy, cfg_.max_depth,
                                     static_cast<double>(cfg_.light_paths), rng);
  }

  const Scene& scene_;
  IntegratorConfig cfg_;
  CameraFrame cam_;
  std::size_t npix_ = 0;
  double r1_ = 0;
  bool merging_ = false;
  bool bidirectional_ = false;
  bool test_driven_ = false;
  MisContext base_ctx_;
  std::vector<GatherRegion> regions_;

  double radius_now_ = 0; // global schedule radius of the current iteration
  std::vector<LightPath> paths_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges_;
  std::vector<std::vector<Splat>> splats_;
  PhotonGrid grid_;
  std::vector<LightVertex> store_; // light vertices when no grid is built
  const std::vector<LightVertex>* photons_ = nullptr;
  std::vector<Rgb> estimate_;
  std::vector<double> vc_add_, vm_add_;
  IterationReport report_;
};

} // namespace

RenderResult render(const Scene& scene, const IntegratorConfig& config,
                    const IterationCallback& per_iteration) {
  Renderer renderer(scene, config);
  RenderResult result;
  result.film = Film(renderer.width(), renderer.height());
  for (std::uint64_t i = 1; i <= config.iterations; ++i) {
    const std::vector<Rgb>& estimate = renderer.step(i);
    result.film.add_iteration(estimate);
    for (std::size_t px = 0; px < renderer.pixel_count(); ++px)
      result.film.add_split(px, renderer.vc_added()[px], renderer.vm_added()[px]);
    if (!renderer.report().radius.empty())
      result.film.set_radius_channel(renderer.report().radius);
    if (per_iteration) per_iteration(renderer.report(), result.film);
    if (config.keep_reports) result.reports.push_back(renderer.report());
  }
  return result;
}

Film render_reference(const Scene& scene, const ReferenceConfig& config) {
  IntegratorConfig cfg;
  cfg.algorithm = Algorithm::bdpt;
  cfg.iterations = std::max<std::uint64_t>(config.max_iterations, 1);
  cfg.seed = config.seed;
  cfg.max_depth = config.max_depth;
  cfg.threads = config.threads;
  cfg.light_paths = config.light_paths;
  cfg.keep_reports = false;

  Renderer renderer(scene, cfg);
  Film film(renderer.width(), renderer.height());
  const std::size_t npix = renderer.pixel_count();
  std::vector<double> mean(npix, 0.0), m2(npix, 0.0);

  for (std::uint64_t i = 1; i <= cfg.iterations; ++i) {
    const std::vector<Rgb>& estimate = renderer.step(i);
    film.add_iteration(estimate);
    const double n = static_cast<double>(i);
    for (std::size_t px = 0; px < npix; ++px) {
      const double x = luminance(estimate[px]);
      const double d = x - mean[px];
      mean[px] += d / n;
      m2[px] += d * (x - mean[px]);
    }
    if (i >= std::max<std::uint64_t>(config.min_iterations, 2) && i % 32 == 0) {
      double image_mean = 0.0;
      for (const double m : mean) image_mean += m;
      image_mean /= static_cast<double>(npix);
      const double floor = config.luminance_floor * image_mean;
      bool all_converged = true;
      for (std::size_t px = 0; px < npix && all_converged; ++px) {
        const double se = std::sqrt(m2[px] / (n * (n - 1.0)));
        all_converged = se <= config.target_rel_error * std::max(mean[px], floor);
      }
      if (all_converged) return film;
    }
  }
  throw std::runtime_error(
      "render_reference: pixel standard errors did not reach the target "
      "within the iteration budget");
}

} // namespace fppm
