// Acceptance runner: end-to-end behavioral checks of the renderer, one line
// of output per criterion. Each criterion is independent; pass criterion ids
// (A1..A12) as arguments to run a subset. --fppm-bin points at the CLI binary
// used by the thread-determinism check. Exit code is the number of failures.
//
// Unlike the unit tests these run whole renders and take minutes; they pin
// the statistical behavior of the engine: test calibration, MIS correctness,
// radius control on engineered scenes, convergence slopes, algorithm
// orderings, determinism, and oracle equivalences.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fppm/film.hpp"
#include "fppm/frame.hpp"
#include "fppm/gather.hpp"
#include "fppm/integrator.hpp"
#include "fppm/path.hpp"
#include "fppm/photon_map.hpp"
#include "fppm/rng.hpp"
#include "fppm/sampling.hpp"
#include "fppm/scene.hpp"
#include "fppm/special_functions.hpp"
#include "fppm/stat_tests.hpp"

#include "mis_reference.hpp"

using namespace fppm;
namespace fs = std::filesystem;

namespace {

std::string g_fppm_bin;
fs::path g_work_dir;

struct Result {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// Scenes. All built from text through the regular parser so the acceptance
// paths match what a user would load from disk.

Scene make_scene(const std::string& text) {
  return parse_scene(text, g_work_dir.string());
}

// Closed emitting box seen from the inside: every wall both emits L_e and
// reflects with albedo rho, so radiance is the geometric series
// L_e * sum_{j<max_depth} rho^j, identical for every estimator family and
// spatially constant. The camera only ever sees wall interiors, and gather
// disks up to ~0.4 world units never cross a wall edge.
constexpr double kFurnaceAlbedo = 0.5;
constexpr double kFurnaceEmit = 1.0;

std::string furnace_text(int res) {
  std::ostringstream s;
  s << "camera pos=(0,0,0) look=(0,0,1) up=(0,1,0) fov=60 res=" << res << "x"
    << res << "\n";
  s << "material wall lambertian albedo=(0.5,0.5,0.5)\n";
  const char* quads[] = {
      "quad corner=(-1,-1,-1) e1=(0,0,2) e2=(2,0,0) material=wall emit=(1,1,1)",
      "quad corner=(-1,1,-1) e1=(2,0,0) e2=(0,0,2) material=wall emit=(1,1,1)",
      "quad corner=(-1,-1,-1) e1=(2,0,0) e2=(0,2,0) material=wall emit=(1,1,1)",
      "quad corner=(-1,-1,1) e1=(0,2,0) e2=(2,0,0) material=wall emit=(1,1,1)",
      "quad corner=(-1,-1,-1) e1=(0,2,0) e2=(0,0,2) material=wall emit=(1,1,1)",
      "quad corner=(1,-1,-1) e1=(0,0,2) e2=(0,2,0) material=wall emit=(1,1,1)",
  };
  for (const char* q : quads) s << q << "\n";
  return s.str();
}

double furnace_radiance(std::uint32_t max_depth) {
  double sum = 0.0, term = kFurnaceEmit;
  for (std::uint32_t j = 0; j < max_depth; ++j, term *= kFurnaceAlbedo)
    sum += term;
  return sum;
}

Image constant_image(int res, double value) {
  Image img;
  img.width = res;
  img.height = res;
  img.pixels.assign(static_cast<std::size_t>(res) * res,
                    Rgb(value, value, value));
  return img;
}

// Diffuse floor under a downward spotlight, camera straight above. The
// texture modulates emission per direction while the direction density stays
// uniform over the cone, so photon arrival counts are spatially uniform while
// photon energies step at texel boundaries.
constexpr double kSpotHeight = 2.0;
constexpr double kSpotCamHeight = 2.25;
constexpr double kSpotConeDeg = 30.0;

std::string spot_floor_text(int res, const std::string& texture,
                            double cone_deg = kSpotConeDeg) {
  std::ostringstream s;
  s << "camera pos=(0," << kSpotCamHeight
    << ",0) look=(0,0,0) up=(0,0,1) fov=60 res=" << res << "x" << res << "\n";
  s << "material floor lambertian albedo=(0.7,0.7,0.7)\n";
  s << "quad corner=(-1.5,0,-1.5) e1=(0,0,3) e2=(3,0,0) material=floor\n";
  s << "spotlight pos=(0," << kSpotHeight
    << ",0) dir=(0,-1,0) angle=" << cone_deg << " intensity=(50,50,50)";
  if (!texture.empty()) s << " texture=" << texture;
  s << "\n";
  return s.str();
}

void write_texture(const std::string& name, int w, int h,
                   const std::function<double(int, int)>& value) {
  Image img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = value(x, y);
      img.at(x, y) = Rgb(v, v, v);
    }
  write_pfm((g_work_dir / name).string(), img);
}

// Point light focused through a glass sphere onto a diffuse floor; the
// camera looks at the caustic spot from the side, past the sphere.
std::string caustic_text(int res) {
  std::ostringstream s;
  s << "camera pos=(0.9,0.9,-0.9) look=(0,0,0) up=(0,1,0) fov=55 res=" << res
    << "x" << res << "\n";
  s << "material floor lambertian albedo=(0.65,0.65,0.65)\n";
  s << "material glass dielectric ior=1.5\n";
  s << "quad corner=(-1,0,-1) e1=(0,0,2) e2=(2,0,0) material=floor\n";
  s << "sphere center=(0,0.5,0) radius=0.3 material=glass\n";
  s << "pointlight pos=(0,1.6,0) intensity=(8,8,8)\n";
  return s.str();
}

// Mirror + glass spheres in a box with a chromatic area light: exercises
// delta chains, splats and the rgb test channels all at once.
std::string mixed_box_text(int res) {
  std::ostringstream s;
  s << "camera pos=(0,0.1,-0.9) look=(0,0,0.2) up=(0,1,0) fov=70 res=" << res
    << "x" << res << "\n";
  s << "material white lambertian albedo=(0.7,0.7,0.7)\n";
  s << "material red lambertian albedo=(0.6,0.15,0.15)\n";
  s << "material green lambertian albedo=(0.15,0.6,0.15)\n";
  s << "material chrome mirror refl=(0.9,0.9,0.9)\n";
  s << "material glass dielectric ior=1.5\n";
  s << "quad corner=(-1,-1,-1) e1=(0,0,2) e2=(2,0,0) material=white\n";
  s << "quad corner=(-1,1,-1) e1=(2,0,0) e2=(0,0,2) material=white\n";
  s << "quad corner=(-1,-1,1) e1=(0,2,0) e2=(2,0,0) material=white\n";
  s << "quad corner=(-1,-1,-1) e1=(0,2,0) e2=(0,0,2) material=red\n";
  s << "quad corner=(1,-1,-1) e1=(0,0,2) e2=(0,2,0) material=green\n";
  s << "sphere center=(-0.4,-0.6,0.3) radius=0.35 material=chrome\n";
  s << "sphere center=(0.45,-0.62,-0.1) radius=0.32 material=glass\n";
  s << "quad corner=(-0.3,0.995,-0.3) e1=(0.6,0,0) e2=(0,0,0.6) "
       "material=white emit=(14,11,8)\n";
  return s.str();
}

// ---------------------------------------------------------------------------
// Radius-sequence scanning (feeds the A10 verdict). Every tracked render
// streams its per-iteration radius reports through one of these; nothing is
// retained beyond the previous iteration and the violation counters.

struct ScanTotals {
  std::uint64_t runs = 0;
  std::uint64_t points = 0;
  std::uint64_t monotone_bad = 0;
  std::uint64_t floor_bad = 0;
} g_scan;

class RadiusScanner {
public:
  RadiusScanner(double r_min, double alpha) : r_min_(r_min), alpha_(alpha) {}

  void feed(const IterationReport& rep) {
    if (rep.radius.empty()) return;
    seen_ = true;
    const double floor =
        schedule_radius(r_min_, alpha_, rep.iteration + 1) * (1.0 - 1e-12);
    if (prev_.empty()) prev_.assign(rep.radius.size(), 0.0);
    for (std::size_t p = 0; p < rep.radius.size(); ++p) {
      const double r = rep.radius[p];
      ++g_scan.points;
      if (rep.iteration > 1 && r > prev_[p] * (1.0 + 1e-12))
        ++g_scan.monotone_bad;
      if (r < floor) ++g_scan.floor_bad;
      prev_[p] = r;
    }
  }

  ~RadiusScanner() {
    if (seen_) ++g_scan.runs;
  }

private:
  double r_min_, alpha_;
  std::vector<double> prev_;
  bool seen_ = false;
};

double resolved_r1(const Scene& scene, const IntegratorConfig& cfg) {
  return cfg.r0_frac * bounding_radius(scene);
}

double resolved_r_min(const Scene& scene, const IntegratorConfig& cfg) {
  if (cfg.schedule.r_min_base > 0.0) return cfg.schedule.r_min_base;
  return 0.001 * resolved_r1(scene, cfg);
}

// Runs a render while scanning radius reports, optionally collecting a
// per-iteration MSE curve against a reference, the final radius vector, and
// cumulative merge-share snapshots over a pixel set.
struct TrackedRun {
  const Image* mse_ref = nullptr;
  std::vector<std::uint64_t>* iters_out = nullptr;
  std::vector<double>* mse_out = nullptr;
  std::vector<double>* final_radius = nullptr;
  const std::vector<std::size_t>* share_pixels = nullptr;
  std::vector<std::uint64_t> share_iterations;
  std::vector<double>* share_out = nullptr; // parallel to share_iterations
};

Film tracked_render(const Scene& scene, IntegratorConfig cfg, TrackedRun t) {
  cfg.keep_reports = false;
  RadiusScanner scan(resolved_r_min(scene, cfg), cfg.schedule.alpha);
  const std::uint64_t last = cfg.iterations;
  auto cb = [&](const IterationReport& rep, const Film& film) {
    scan.feed(rep);
    if (t.mse_ref != nullptr) {
      t.iters_out->push_back(rep.iteration);
      t.mse_out->push_back(mse(film.image(), *t.mse_ref));
    }
    if (t.final_radius != nullptr && rep.iteration == last)
      *t.final_radius = rep.radius;
    if (t.share_out != nullptr)
      for (std::size_t i = 0; i < t.share_iterations.size(); ++i)
        if (rep.iteration == t.share_iterations[i]) {
          double vc = 0.0, vm = 0.0;
          for (std::size_t px : *t.share_pixels) {
            vc += film.vc_total(px);
            vm += film.vm_total(px);
          }
          (*t.share_out)[i] = vc + vm > 0.0 ? vm / (vc + vm) : 0.0;
        }
  };
  RenderResult res = render(scene, cfg, cb);
  return std::move(res.film);
}

IntegratorConfig base_config(Algorithm algo, std::uint64_t iters,
                             std::uint64_t seed, double r0_frac) {
  IntegratorConfig cfg;
  cfg.algorithm = algo;
  cfg.iterations = iters;
  cfg.seed = seed;
  cfg.r0_frac = r0_frac;
  cfg.threads = 1;
  cfg.keep_reports = false;
  return cfg;
}

double median5(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// ---------------------------------------------------------------------------
// A1: quantile numerics against the published constants.

Result a1() {
  const double chi2 = chi2_quantile(0.99, 11);
  const double f = f_quantile(0.99, 11, 1000000000.0);
  const bool ok_chi2 = chi2 >= 24.714 && chi2 <= 24.735;
  const bool ok_f = f >= 2.24 && f <= 2.26;
  return {ok_chi2 && ok_f,
          format("chi2(0.99,11)=%.5f, f(0.99,11,1e9)=%.5f", chi2, f)};
}

// ---------------------------------------------------------------------------
// A2/A3: calibration of the F test on synthetic normal data. 12 sectors of
// m=100 samples; under equal means the rejection rate must sit near the
// nominal alpha, and a 3-sigma shift of one sector mean must be caught.

Result calibration(double shift, double lo, double hi) {
  std::mt19937_64 gen(shift == 0.0 ? 0xACC2 : 0xACC3);
  std::normal_distribution<double> noise(0.0, 1.0);
  const int trials = 10000, n = 12, m = 100;
  int rejected = 0;
  std::vector<SectorStats> stats(n);
  for (int t = 0; t < trials; ++t) {
    for (auto& s : stats) s.clear();
    for (int i = 0; i < n; ++i) {
      const double mean = 5.0 + (i == 0 ? shift : 0.0);
      for (int j = 0; j < m; ++j) stats[i].add(mean + noise(gen));
    }
    if (anova_f_test(stats, m, 0.01).reject) ++rejected;
  }
  const double rate = static_cast<double>(rejected) / trials;
  return {rate >= lo && rate <= hi,
          format("rejection rate %.4f over %d trials", rate, trials)};
}

Result a2() { return calibration(0.0, 0.005, 0.02); }
Result a3() { return calibration(3.0, 0.99, 1.0); }

// ---------------------------------------------------------------------------
// A4: MIS weights. Random abstract paths of depth <= 4 under the balance
// heuristic; the recursive-partials weights must match the enumeration
// oracle term by term and sum to one.

Result a4() {
  RngStream rng(2024);
  const MisContext contexts[] = {
      {1, 1, 1.0, 1.0}, // merging on; eta filled per path
      {1, 0, 1.0, 0.0}, // connections only
  };
  int paths = 0;
  double worst_sum = 0.0, worst_term = 0.0;
  for (const MisContext& base : contexts) {
    for (int trial = 0; trial < 1000; ++trial) {
      const int k = 2 + static_cast<int>(rng.next_double() * 3.0); // 2..4
      misref::AbstractPath p = misref::random_path(rng, k, true);
      MisContext ctx = base;
      ctx.eta_vm = ctx.n_vm > 0 ? p.n_light_paths * p.merge_area : 0.0;
      if (ctx.n_vm == 0) p.merge_area = 0.0;

      const misref::TechniqueDensities dens = misref::enumerate_densities(p);
      double denom = 0.0;
      for (double d : dens.connect) denom += mis_pow(ctx, d);
      for (double d : dens.merge) denom += mis_pow(ctx, d);
      if (denom == 0.0) continue;
      ++paths;

      const misref::EngineWeights got = misref::engine_weights(ctx, p, dens);
      double sum = 0.0;
      auto check_term = [&](double have, double dens_term) {
        const double want = mis_pow(ctx, dens_term) / denom;
        const double err =
            want == 0.0 ? std::abs(have)
                        : std::abs(have - want) / std::max(want, 1e-300);
        worst_term = std::max(worst_term, err);
        sum += have;
      };
      for (int s = 0; s <= p.k; ++s)
        check_term(got.connect[static_cast<std::size_t>(s)],
                   dens.connect[static_cast<std::size_t>(s)]);
      for (int s = 1; s < p.k; ++s)
        check_term(got.merge[static_cast<std::size_t>(s)],
                   dens.merge[static_cast<std::size_t>(s)]);
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
  }
  const bool ok = worst_sum < 1e-9 && worst_term < 1e-9;
  return {ok, format("%d paths, max |sum-1| = %.2e, max term err = %.2e",
                     paths, worst_sum, worst_term)};
}

// ---------------------------------------------------------------------------
// A5: radius control behavior. (a) On the uniform furnace the test must hold
// the initial radius almost everywhere and converge to the analytic
// radiance. (b) On a floor lit by a half-masked spotlight the pixels near
// the bright/dark boundary must keep rejecting and shrink through k^3 * r1
// within 200 iterations.

Result a5() {
  // The radius test runs once per iteration on the pooled sector statistics,
  // so "every radius held for T iterations" is a family of T highly
  // correlated looks at a growing sample. An isolated simulation of that
  // crossing process (cumulative sector sums, F vs the running critical
  // value) puts the family-wise rejection rate at 13-19% over 100 looks for
  // per-look significance 0.01 regardless of photon density, and near 2% for
  // 0.001. A 95% hold target is therefore a family-wise error budget, and
  // both halves of this criterion run at the per-look significance that
  // budget implies. The level stays a per-run setting; the library default
  // is unchanged.
  constexpr double kRunAlphaF = 0.001;

  // (a) uniform field: hold.
  const Scene furnace = make_scene(furnace_text(64));
  IntegratorConfig cfg = base_config(Algorithm::fppm, 100, 101, 0.1);
  cfg.test.alpha_f = kRunAlphaF;
  const double r1 = resolved_r1(furnace, cfg);
  std::vector<double> radius;
  TrackedRun track;
  track.final_radius = &radius;
  Film film = tracked_render(furnace, cfg, track);

  std::size_t held = 0;
  for (double r : radius) held += r == r1 ? 1 : 0;
  const double hold_frac = static_cast<double>(held) / radius.size();

  double mean_lum = 0.0;
  const Image img = film.image();
  for (const Rgb& c : img.pixels) mean_lum += luminance(c);
  mean_lum /= static_cast<double>(img.pixels.size());
  const double expect = furnace_radiance(cfg.max_depth);
  const double rad_err = std::abs(mean_lum - expect) / expect;

  // (b) step edge: shrink. The spot texture is bright for azimuth < pi and
  // black otherwise, which paints a sharp straight boundary through the spot
  // center on the floor. An odd image resolution puts one pixel column dead
  // on that line, and r1 of ~0.65 pixel footprints keeps the band of tested
  // pixels to that column, whose jittered gather disks straddle the step at
  // every radius level. A 15 degree cone concentrates the photons so the
  // smallest disks still collect ~10 per iteration.
  write_texture("half.pfm", 2, 1, [](int x, int) { return x == 0 ? 1.0 : 0.0; });
  const int res = 65;
  const double cone_deg = 15.0;
  const Scene step = make_scene(spot_floor_text(res, "half.pfm", cone_deg));
  const double cone = cone_deg * kPi / 180.0;
  const double footprint =
      2.0 * kSpotCamHeight * std::tan(30.0 * kPi / 180.0) / res;
  IntegratorConfig scfg = base_config(Algorithm::fppm, 200, 7,
                                      0.65 * footprint / bounding_radius(step));
  scfg.light_paths = 65536;
  scfg.test.alpha_f = kRunAlphaF;
  const double sr1 = resolved_r1(step, scfg);

  std::vector<double> sradius;
  TrackedRun strack;
  strack.final_radius = &sradius;
  tracked_render(step, scfg, strack);

  const Emitter& spot = step.emitters[0];
  const TangentFrame fr = build_tangent_frame(normalize(spot.direction));
  const CameraFrame cam = make_camera_frame(step.camera);
  const double spot_r = kSpotHeight * std::tan(cone);
  std::size_t edge = 0, shrunk = 0;
  for (int y = 0; y < res; ++y)
    for (int x = 0; x < res; ++x) {
      const Ray ray = make_camera_ray(cam, x + 0.5, y + 0.5);
      const auto hit = intersect(step, ray);
      if (!hit || hit->point.y > 0.01) continue;
      const Point3 p = hit->point;
      const double edge_dist = std::abs(dot(p, fr.v));
      const double center_dist = std::sqrt(p.x * p.x + p.z * p.z);
      if (edge_dist >= sr1 || center_dist >= 0.8 * spot_r) continue;
      ++edge;
      const double k3 = scfg.schedule.k * scfg.schedule.k * scfg.schedule.k;
      if (sradius[static_cast<std::size_t>(y) * res + x] <
          k3 * sr1 * (1.0 - 1e-9))
        ++shrunk;
    }
  const double edge_frac =
      edge > 0 ? static_cast<double>(shrunk) / static_cast<double>(edge) : 0.0;

  const bool ok = hold_frac >= 0.95 && rad_err < 0.01 && edge_frac >= 0.90;
  return {ok, format("hold %.1f%%, radiance err %.3f%%, edge shrink %.1f%% "
                     "(%zu pixels)",
                     100.0 * hold_frac, 100.0 * rad_err, 100.0 * edge_frac,
                     edge)};
}

// ---------------------------------------------------------------------------
// A6: convergence slopes on the uniform furnace, where the analytic image is
// exact and MSE is pure variance. The fixed schedule at alpha=2/3 decays
// like t^-2/3; the holding test keeps the radius and regains t^-1.

Result a6() {
  const Scene furnace = make_scene(furnace_text(64));
  const Image ref = constant_image(64, furnace_radiance(10));
  const std::uint64_t seeds[] = {11, 23, 37, 41, 59};

  auto slope_for = [&](Algorithm algo, double alpha) {
    std::vector<double> slopes;
    for (std::uint64_t seed : seeds) {
      IntegratorConfig cfg = base_config(algo, 2000, seed, 0.05);
      cfg.schedule.alpha = alpha;
      std::vector<std::uint64_t> iters;
      std::vector<double> mses;
      TrackedRun track;
      track.mse_ref = &ref;
      track.iters_out = &iters;
      track.mse_out = &mses;
      tracked_render(furnace, cfg, track);
      slopes.push_back(fit_convergence_slope(iters, mses, 100, 2000));
    }
    return median5(slopes);
  };

  const double sppm = slope_for(Algorithm::sppm, 2.0 / 3.0);
  const double fppm = slope_for(Algorithm::fppm, 0.75);
  const bool ok = sppm >= -0.80 && sppm <= -0.55 && fppm >= -1.15 &&
                  fppm <= -0.80;
  return {ok, format("sppm slope %.3f (want [-0.80,-0.55]), fppm slope %.3f "
                     "(want [-1.15,-0.80])",
                     sppm, fppm)};
}

// ---------------------------------------------------------------------------
// A7/A8 share the caustic runs, so both are computed once and cached.

struct OrderingData {
  bool ready = false;
  double spot_fppm = 0, spot_cppm = 0; // median mse
  int spot_agree = 0;
  double caustic_plus = 0, caustic_vcm = 0;
  int caustic_agree = 0;
  double share100_vcm = 0, share1000_vcm = 0;
  double share100_plus = 0, share1000_plus = 0;
} g_ordering;

std::vector<std::size_t> caustic_pixel_set(const Scene& scene, int res) {
  const CameraFrame cam = make_camera_frame(scene.camera);
  std::vector<std::size_t> px;
  for (int y = 0; y < res; ++y)
    for (int x = 0; x < res; ++x) {
      const Ray ray = make_camera_ray(cam, x + 0.5, y + 0.5);
      const auto hit = intersect(scene, ray);
      if (!hit || hit->point.y > 0.01) continue;
      // Fixed world-space disk under the sphere axis.
      if (hit->point.x * hit->point.x + hit->point.z * hit->point.z <=
          0.15 * 0.15)
        px.push_back(static_cast<std::size_t>(y) * res + x);
    }
  return px;
}

void compute_ordering() {
  if (g_ordering.ready) return;
  const std::uint64_t seeds[] = {11, 23, 37, 41, 59};
  const int res = 32;

  // Textured spotlight: dartboard checker with 5x energy steps between
  // cells and spatially uniform photon counts. A count-based uniformity
  // test keeps the start radius everywhere and the kernel keeps averaging
  // across cell boundaries; the contribution-based test shrinks there.
  write_texture("checker.pfm", 6, 3,
                [](int x, int y) { return (x + y) % 2 == 0 ? 1.0 : 0.2; });
  const Scene spot = make_scene(spot_floor_text(res, "checker.pfm"));
  ReferenceConfig refcfg;
  const Image spot_ref = render_reference(spot, refcfg).image();

  const double spot_r0 = 0.15 / bounding_radius(spot);
  std::vector<double> mse_f, mse_c;
  int spot_agree = 0;
  for (std::uint64_t seed : seeds) {
    Film f = tracked_render(spot, base_config(Algorithm::fppm, 1000, seed,
                                              spot_r0), {});
    Film c = tracked_render(spot, base_config(Algorithm::cppm, 1000, seed,
                                              spot_r0), {});
    mse_f.push_back(mse(f.image(), spot_ref));
    mse_c.push_back(mse(c.image(), spot_ref));
    if (mse_f.back() <= mse_c.back()) ++spot_agree;
  }

  // Caustic: merging carries the sphere-focused light, so the radius policy
  // controls how much of it survives the weighting as iterations grow.
  const Scene caustic = make_scene(caustic_text(res));
  const Image caustic_ref = render_reference(caustic, refcfg).image();
  const std::vector<std::size_t> cpx = caustic_pixel_set(caustic, res);

  const double ca_r0 = 0.1 / bounding_radius(caustic);
  std::vector<double> mse_p, mse_v;
  std::vector<double> sh100_p, sh1000_p, sh100_v, sh1000_v;
  int caustic_agree = 0;
  for (std::uint64_t seed : seeds) {
    auto run = [&](Algorithm algo, std::vector<double>& s100,
                   std::vector<double>& s1000) {
      TrackedRun track;
      std::vector<double> shares(2, 0.0);
      track.share_pixels = &cpx;
      track.share_iterations = {100, 1000};
      track.share_out = &shares;
      Film film = tracked_render(caustic,
                                 base_config(algo, 1000, seed, ca_r0), track);
      s100.push_back(shares[0]);
      s1000.push_back(shares[1]);
      return mse(film.image(), caustic_ref);
    };
    mse_p.push_back(run(Algorithm::vcm_plus, sh100_p, sh1000_p));
    mse_v.push_back(run(Algorithm::vcm, sh100_v, sh1000_v));
    if (mse_p.back() <= mse_v.back()) ++caustic_agree;
  }

  g_ordering.spot_fppm = median5(mse_f);
  g_ordering.spot_cppm = median5(mse_c);
  g_ordering.spot_agree = spot_agree;
  g_ordering.caustic_plus = median5(mse_p);
  g_ordering.caustic_vcm = median5(mse_v);
  g_ordering.caustic_agree = caustic_agree;
  g_ordering.share100_vcm = median5(sh100_v);
  g_ordering.share1000_vcm = median5(sh1000_v);
  g_ordering.share100_plus = median5(sh100_p);
  g_ordering.share1000_plus = median5(sh1000_p);
  g_ordering.ready = true;
}

Result a7() {
  compute_ordering();
  const bool spot_ok =
      g_ordering.spot_fppm <= g_ordering.spot_cppm && g_ordering.spot_agree >= 4;
  const bool caustic_ok = g_ordering.caustic_plus <= g_ordering.caustic_vcm &&
                          g_ordering.caustic_agree >= 4;
  return {spot_ok && caustic_ok,
          format("spot mse fppm %.3f vs cppm %.3f (%d/5), caustic mse vcm+ "
                 "%.3f vs vcm %.3f (%d/5)",
                 g_ordering.spot_fppm, g_ordering.spot_cppm,
                 g_ordering.spot_agree, g_ordering.caustic_plus,
                 g_ordering.caustic_vcm, g_ordering.caustic_agree)};
}

Result a8() {
  compute_ordering();
  const bool vcm_falls = g_ordering.share1000_vcm < g_ordering.share100_vcm;
  const bool plus_holds =
      g_ordering.share1000_plus >= 0.5 * g_ordering.share100_plus;
  return {vcm_falls && plus_holds,
          format("caustic vm share, vcm %.3f -> %.3f, vcm+ %.3f -> %.3f",
                 g_ordering.share100_vcm, g_ordering.share1000_vcm,
                 g_ordering.share100_plus, g_ordering.share1000_plus)};
}

// ---------------------------------------------------------------------------
// A9: thread-count determinism through the CLI binary, byte-for-byte.

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Result a9() {
  if (g_fppm_bin.empty() || !fs::exists(g_fppm_bin))
    return {false, "fppm binary not found (pass --fppm-bin)"};
  const fs::path scene_path = g_work_dir / "threads.scn";
  std::ofstream(scene_path) << mixed_box_text(16);

  const char* algos[] = {"pt", "bdpt", "sppm", "cppm", "fppm", "vcm", "vcm+"};
  std::string mismatched;
  for (const char* algo : algos) {
    fs::path out[2];
    for (int i = 0; i < 2; ++i) {
      out[i] = g_work_dir / format("threads-%s-%d.pfm", algo, i);
      std::ostringstream cmd;
      cmd << g_fppm_bin << " render --scene " << scene_path.string()
          << " --algo " << algo << " --iters 10 --seed 3 --threads "
          << (i == 0 ? 1 : 8) << " --out " << out[i].string()
          << " > /dev/null 2>&1";
      if (std::system(cmd.str().c_str()) != 0)
        return {false, format("render failed for %s", algo)};
    }
    if (read_file(out[0]) != read_file(out[1])) {
      if (!mismatched.empty()) mismatched += ", ";
      mismatched += algo;
    }
  }
  if (!mismatched.empty())
    return {false, "thread count changed output for: " + mismatched};
  return {true, "7 algorithms, threads 1 vs 8, identical pfm bytes"};
}

// ---------------------------------------------------------------------------
// A10: radius invariants scanned from every tracked run in this process.
// When run alone, two short renders provide the sequences.

Result a10() {
  if (g_scan.runs == 0) {
    const Scene furnace = make_scene(furnace_text(32));
    tracked_render(furnace, base_config(Algorithm::fppm, 30, 9, 0.05), {});
    tracked_render(furnace, base_config(Algorithm::sppm, 30, 9, 0.05), {});
    tracked_render(furnace, base_config(Algorithm::vcm_plus, 30, 9, 0.05), {});
  }
  const bool ok = g_scan.monotone_bad == 0 && g_scan.floor_bad == 0;
  return {ok, format("%llu runs, %llu radius points, %llu monotonicity / "
                     "%llu floor violations",
                     static_cast<unsigned long long>(g_scan.runs),
                     static_cast<unsigned long long>(g_scan.points),
                     static_cast<unsigned long long>(g_scan.monotone_bad),
                     static_cast<unsigned long long>(g_scan.floor_bad))};
}

// ---------------------------------------------------------------------------
// A11: per-iteration cost of the statistics machinery. Forcing the test
// decision to reject makes the tested radii follow the fixed schedule bit
// for bit (see the degeneracy unit tests), so both algorithms do identical
// gather work and the wall-time difference isolates the per-photon
// statistics collection.

Result a11() {
  const Scene furnace = make_scene(furnace_text(64));
  auto median_seconds = [&](Algorithm algo) {
    IntegratorConfig cfg = base_config(algo, 100, 5, 0.05);
    if (algo == Algorithm::fppm) {
      cfg.schedule.r_min_base = resolved_r1(furnace, cfg);
      cfg.test.override_decision = TestOverride::always_reject;
    }
    std::vector<double> secs;
    auto cb = [&](const IterationReport& rep, const Film&) {
      secs.push_back(rep.seconds);
    };
    render(furnace, cfg, cb);
    std::sort(secs.begin(), secs.end());
    return secs[secs.size() / 2];
  };
  const double t_sppm = median_seconds(Algorithm::sppm);
  const double t_fppm = median_seconds(Algorithm::fppm);
  const double rel = std::abs(t_fppm - t_sppm) / t_sppm;
  return {rel < 0.25, format("median seconds/iter: fppm %.4f vs sppm %.4f "
                             "(%+.1f%%)",
                             t_fppm, t_sppm, 100.0 * (t_fppm / t_sppm - 1.0))};
}

// ---------------------------------------------------------------------------
// A12: oracle equivalences for the supporting machinery.

Result a12() {
  // Photon grid vs brute force.
  RngStream rng(77);
  auto uni = [&](double lo, double hi) {
    return lo + (hi - lo) * rng.next_double();
  };
  std::vector<LightVertex> verts(1000);
  for (std::size_t i = 0; i < verts.size(); ++i) {
    verts[i].position = {uni(-2, 2), uni(-2, 2), uni(-2, 2)};
    verts[i].path_index = static_cast<std::uint32_t>(i);
  }
  const double cell = 0.5;
  const PhotonGrid grid(verts, cell);
  std::vector<std::uint32_t> got;
  int bad_queries = 0;
  for (int q = 0; q < 100; ++q) {
    const Point3 c{uni(-2.2, 2.2), uni(-2.2, 2.2), uni(-2.2, 2.2)};
    const double r = uni(0.0, cell * 0.999);
    grid.query_ball(c, r, got);
    std::vector<std::uint32_t> want;
    for (const LightVertex& v : grid.vertices())
      if (length_squared(v.position - c) <= r * r)
        want.push_back(v.path_index);
    std::vector<std::uint32_t> got_ids;
    for (std::uint32_t idx : got) got_ids.push_back(grid.vertices()[idx].path_index);
    std::sort(got_ids.begin(), got_ids.end());
    std::sort(want.begin(), want.end());
    if (got_ids != want) ++bad_queries;
  }

  // Streaming F statistic vs a two-pass evaluation on materialized samples.
  std::mt19937_64 gen(0xACC12);
  std::uniform_real_distribution<double> val(0.0, 3.0);
  std::uniform_int_distribution<int> cnt(0, 20);
  double worst_f = 0.0;
  for (int d = 0; d < 1000; ++d) {
    const int n = 12;
    const std::uint64_t m = 64;
    std::vector<SectorStats> stats(n);
    std::vector<std::vector<double>> samples(n);
    for (int i = 0; i < n; ++i) {
      const int k = cnt(gen);
      for (int j = 0; j < k; ++j) {
        const double v = val(gen);
        stats[static_cast<std::size_t>(i)].add(v);
        samples[static_cast<std::size_t>(i)].push_back(v);
      }
      samples[static_cast<std::size_t>(i)].resize(m, 0.0); // implicit zeros
    }
    const double f1 = f_statistic(stats, m);
    double grand = 0.0;
    std::vector<double> means(n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (double v : samples[static_cast<std::size_t>(i)])
        means[static_cast<std::size_t>(i)] += v;
      means[static_cast<std::size_t>(i)] /= static_cast<double>(m);
      grand += means[static_cast<std::size_t>(i)];
    }
    grand /= n;
    double ssb = 0.0, ssw = 0.0;
    for (int i = 0; i < n; ++i) {
      const double dm = means[static_cast<std::size_t>(i)] - grand;
      ssb += static_cast<double>(m) * dm * dm;
      for (double v : samples[static_cast<std::size_t>(i)]) {
        const double dv = v - means[static_cast<std::size_t>(i)];
        ssw += dv * dv;
      }
    }
    const double f2 = ssw == 0.0
                          ? (ssb == 0.0 ? 0.0
                                        : std::numeric_limits<double>::infinity())
                          : (ssb / (n - 1)) / (ssw / (static_cast<double>(n) *
                                                      static_cast<double>(m - 1)));
    if (std::isinf(f1) && std::isinf(f2)) continue;
    worst_f = std::max(worst_f, std::abs(f1 - f2) / std::max(1.0, std::abs(f2)));
  }

  // PFM roundtrip: write, read, write again; the files must match.
  Image img;
  img.width = 17;
  img.height = 9;
  img.pixels.resize(17 * 9);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    img.pixels[i] = {uni(0.0, 1000.0), i % 7 == 0 ? 0.0 : uni(0.0, 1.0),
                     uni(0.0, 1.0) * 1e-20};
  const fs::path p1 = g_work_dir / "round1.pfm";
  const fs::path p2 = g_work_dir / "round2.pfm";
  write_pfm(p1.string(), img);
  write_pfm(p2.string(), read_pfm(p1.string()));
  const bool pfm_ok = read_file(p1) == read_file(p2);

  const bool ok = bad_queries == 0 && worst_f < 1e-9 && pfm_ok;
  return {ok, format("grid queries bad %d/100, max F err %.2e, pfm roundtrip %s",
                     bad_queries, worst_f, pfm_ok ? "exact" : "MISMATCH")};
}

} // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* id;
    const char* title;
    std::function<Result()> run;
  };
  const Criterion table[] = {
      {"A1", "f / chi-square quantiles match published constants", a1},
      {"A2", "f-test type-i error rate at alpha 0.01", a2},
      {"A3", "f-test power under a 3-sigma sector shift", a3},
      {"A4", "mis weights: partition of unity and enumeration oracle", a4},
      {"A5", "radius control: hold on uniform, shrink at step edge", a5},
      {"A6", "mse convergence slopes on the uniform plane", a6},
      {"A7", "mse ordering: fppm<=cppm and vcm+<=vcm", a7},
      {"A8", "vm-share trend on the caustic scene", a8},
      {"A9", "bit-identical output across thread counts", a9},
      {"A10", "radius sequences monotone and above the floor", a10},
      {"A11", "per-iteration overhead of testing vs fixed schedule", a11},
      {"A12", "photon query, streaming f, pfm roundtrip oracles", a12},
  };

  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--fppm-bin" && i + 1 < argc) {
      g_fppm_bin = argv[++i];
    } else {
      selected.push_back(arg);
    }
  }

  g_work_dir = fs::temp_directory_path() / "fppm-acceptance";
  fs::create_directories(g_work_dir);

  int failures = 0;
  for (const Criterion& c : table) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%-4s %-56s %s  (%s)\n", c.id, c.title,
                r.pass ? "pass" : "FAIL", r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  return failures;
}
