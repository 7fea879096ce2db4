#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "fppm/film.hpp"
#include "fppm/gather.hpp"
#include "fppm/scene.hpp"

namespace fppm {

enum class Algorithm { pt, bdpt, sppm, cppm, fppm, vcm, vcm_plus };

// CLI spellings: pt, bdpt, sppm, cppm, fppm, vcm, vcm+.
std::optional<Algorithm> parse_algorithm(std::string_view name);
std::string_view algorithm_name(Algorithm a);

struct IntegratorConfig {
  Algorithm algorithm = Algorithm::fppm;
  std::uint64_t iterations = 1;
  std::uint64_t seed = 0;
  std::uint32_t max_depth = 10; // segments of a full path, camera to light
  int threads = 0;              // 0: one per hardware thread
  // Initial kernel radius as a fraction of the scene bounding radius. Values
  // outside [0.0001, 0.01] render fine but print a warning.
  double r0_frac = 0.002;
  std::uint64_t light_paths = 0; // J; 0: one per pixel
  double mis_beta = 1.0;         // 1 is the balance heuristic
  // r_min_base <= 0 resolves to 0.1% of the initial radius.
  RadiusSchedule schedule;
  TestConfig test;
  bool keep_reports = true; // false drops per-iteration snapshots (big renders)
};

struct IterationReport {
  std::uint64_t iteration = 0; // 1-based
  double seconds = 0;          // wall time of this iteration alone
  // Per-pixel kernel radius after this iteration's update (the radius the
  // next iteration will gather with). Empty for pt and bdpt.
  std::vector<double> radius;
  // Per-pixel: 1 when this iteration's test shrank the radius.
  std::vector<std::uint8_t> rejected;
  // Frame totals of this iteration's estimate, split by strategy family:
  // merge-type (photon) luminance vs everything else.
  double vc_luminance = 0;
  double vm_luminance = 0;
};

// Called after each iteration with that iteration's report and the film so
// far. The film's per-pixel vc/vm totals are cumulative.
using IterationCallback = std::function<void(const IterationReport&, const Film&)>;

struct RenderResult {
  Film film;
  std::vector<IterationReport> reports; // empty when keep_reports is false
};

// Runs config.iterations progressive iterations. The film is the unweighted
// mean of the per-iteration estimates; output is a pure function of (scene,
// config), independent of the thread count.
RenderResult render(const Scene& scene, const IntegratorConfig& config,
                    const IterationCallback& per_iteration = {});

struct ReferenceConfig {
  // A pixel counts as converged when the standard error of its luminance mean
  // drops below target_rel_error * max(pixel luminance, luminance_floor *
  // mean image luminance).
  double target_rel_error = 0.02;
  double luminance_floor = 0.01;
  std::uint64_t min_iterations = 64;
  std::uint64_t max_iterations = 65536;
  std::uint64_t seed = 0x5eed;
  std::uint32_t max_depth = 10;
  int threads = 0;
  std::uint64_t light_paths = 0;
};

// Bidirectional reference render, stopped once every pixel converges.
// Throws std::runtime_error when max_iterations pass without convergence.
Film render_reference(const Scene& scene, const ReferenceConfig& config);

} // namespace fppm
