// Microbenchmarks for the per-photon hot path (grid queries, sector binning,
// the streaming F evaluation) plus whole short renders that show what the
// hypothesis tests add on top of a fixed radius schedule.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <string>
#include <vector>

#include "fppm/gather.hpp"
#include "fppm/integrator.hpp"
#include "fppm/photon_map.hpp"
#include "fppm/rng.hpp"
#include "fppm/scene.hpp"
#include "fppm/special_functions.hpp"
#include "fppm/stat_tests.hpp"

namespace {

using namespace fppm;

std::vector<LightVertex> random_vertices(std::size_t count, double extent) {
  RngStream rng(42);
  std::vector<LightVertex> verts(count);
  for (std::size_t i = 0; i < count; ++i) {
    verts[i].position = {extent * (2 * rng.next_double() - 1),
                         extent * (2 * rng.next_double() - 1),
                         extent * (2 * rng.next_double() - 1)};
    verts[i].throughput = Rgb{1, 1, 1};
    verts[i].path_index = static_cast<std::uint32_t>(i);
  }
  return verts;
}

void grid_build(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0));
  const auto verts = random_vertices(count, 10.0);
  for (auto _ : state) {
    PhotonGrid grid(verts, 0.5);
    benchmark::DoNotOptimize(grid.size());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(count));
}
BENCHMARK(grid_build)->Range(1 << 10, 1 << 18);

void grid_query(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0));
  const PhotonGrid grid(random_vertices(count, 10.0), 0.5);
  RngStream rng(7);
  std::vector<std::uint32_t> out;
  std::size_t found = 0;
  for (auto _ : state) {
    const Point3 center{10.0 * (2 * rng.next_double() - 1),
                        10.0 * (2 * rng.next_double() - 1),
                        10.0 * (2 * rng.next_double() - 1)};
    grid.query_ball(center, 0.4, out);
    found += out.size();
  }
  benchmark::DoNotOptimize(found);
  state.SetItemsProcessed(static_cast<std::int64_t>(found));
}
BENCHMARK(grid_query)->Range(1 << 10, 1 << 18);

void sector_binning(benchmark::State& state) {
  RngStream rng(3);
  std::vector<UnifiedPoint> points(4096);
  for (auto& p : points) {
    // Rejection-sample the unit disk, then scale under the kernel radius.
    double u, v;
    do {
      u = 2 * rng.next_double() - 1;
      v = 2 * rng.next_double() - 1;
    } while (u * u + v * v > 1);
    p = {0.05 * u, 0.05 * v};
  }
  std::size_t i = 0;
  int acc = 0;
  for (auto _ : state) {
    acc += sector_index(points[i], 0.05, 2, 6);
    i = (i + 1) & 4095;
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(sector_binning);

void f_evaluation(benchmark::State& state) {
  RngStream rng(11);
  std::vector<SectorStats> sectors(12);
  for (auto& s : sectors)
    for (int j = 0; j < 64; ++j) s.add(rng.next_double());
  double acc = 0;
  for (auto _ : state) acc += f_statistic(sectors, 4096);
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(f_evaluation);

// First call per (d1, d2, alpha) computes the quantile, later calls hit the
// memo. The cold case walks d2 so every call misses.
void f_test_memoized(benchmark::State& state) {
  RngStream rng(11);
  std::vector<SectorStats> sectors(12);
  for (auto& s : sectors)
    for (int j = 0; j < 64; ++j) s.add(rng.next_double());
  bool acc = false;
  for (auto _ : state) acc ^= anova_f_test(sectors, 4096, 0.01).reject;
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(f_test_memoized);

void f_quantile_cold(benchmark::State& state) {
  double d2 = 24.0;
  double acc = 0;
  for (auto _ : state) {
    acc += f_quantile(0.99, 11.0, d2);
    d2 += 12.0;
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(f_quantile_cold);

void chi2_quantile_cold(benchmark::State& state) {
  double df = 2.0;
  double acc = 0;
  for (auto _ : state) {
    acc += chi2_quantile(0.99, df);
    df += 1.0;
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(chi2_quantile_cold);

// Whole short renders on an enclosed diffuse box. The sppm/fppm pair is the
// interesting read: equal photon work, the delta is the statistics pipeline.
const char* const kBoxScene =
    "camera pos=(0,0,0) look=(0,0,1) up=(0,1,0) fov=60 res=16x16\n"
    "material wall lambertian albedo=(0.5,0.5,0.5)\n"
    "quad corner=(-1,-1,-1) e1=(0,0,2) e2=(2,0,0) material=wall emit=(1,1,1)\n"
    "quad corner=(-1,1,-1) e1=(2,0,0) e2=(0,0,2) material=wall emit=(1,1,1)\n"
    "quad corner=(-1,-1,-1) e1=(2,0,0) e2=(0,2,0) material=wall emit=(1,1,1)\n"
    "quad corner=(-1,-1,1) e1=(0,2,0) e2=(2,0,0) material=wall emit=(1,1,1)\n"
    "quad corner=(-1,-1,-1) e1=(0,2,0) e2=(0,0,2) material=wall emit=(1,1,1)\n"
    "quad corner=(1,-1,-1) e1=(0,0,2) e2=(0,2,0) material=wall emit=(1,1,1)\n";

void short_render(benchmark::State& state, Algorithm algo) {
  const Scene scene = parse_scene(kBoxScene);
  IntegratorConfig cfg;
  cfg.algorithm = algo;
  cfg.iterations = 5;
  cfg.seed = 1;
  cfg.threads = 1;
  cfg.r0_frac = 0.005;
  cfg.keep_reports = false;
  for (auto _ : state) {
    const RenderResult res = render(scene, cfg);
    benchmark::DoNotOptimize(res.film.width());
  }
}
BENCHMARK_CAPTURE(short_render, pt, Algorithm::pt)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(short_render, bdpt, Algorithm::bdpt)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(short_render, sppm, Algorithm::sppm)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(short_render, cppm, Algorithm::cppm)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(short_render, fppm, Algorithm::fppm)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(short_render, vcm, Algorithm::vcm)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(short_render, vcm_plus, Algorithm::vcm_plus)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
