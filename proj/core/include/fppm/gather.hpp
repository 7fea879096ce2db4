#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fppm/frame.hpp"
#include "fppm/stat_tests.hpp"
#include "fppm/vec.hpp"

namespace fppm {

/// Radius control parameters. A rejected uniformity test shrinks the radius
/// geometrically by k but never below r_min_base * sqrt(i^(alpha-1)), the
/// same power law the fixed schedule follows.
struct RadiusSchedule {
  double k = 0.7;
  double alpha = 0.75;
  double r_min_base = 0;
};

/// base * sqrt(i^(alpha-1)) for iteration i >= 1. Both the fixed schedule and
/// the shrink lower bound evaluate this one expression, so forcing a rejection
/// on every iteration reproduces the fixed schedule bit for bit.
double schedule_radius(double base, double alpha, std::uint64_t i);

/// auto_detect lets the integrator pick: rgb when any emitter is chromatic,
/// luminance otherwise. A GatherRegion itself treats auto_detect as luminance.
enum class TestChannels { auto_detect, luminance, rgb };

/// Testing hooks: force the accept/reject decision regardless of the data.
enum class TestOverride { none, always_reject, never_reject };

struct TestConfig {
  int n_annuli = 2;
  int n_sectors = 6;
  double alpha_f = 0.01;
  double alpha_chi2 = 0.01;
  TestChannels channels = TestChannels::auto_detect;
  TestOverride override_decision = TestOverride::none;
};

/// One kernel-estimation sample: plane coordinates of the photon relative to
/// the gather point, and the full-path contribution it carries.
struct ContributionSample {
  UnifiedPoint y;
  Rgb value;
};

/// Partition index inside the disk of the given radius: equi-areal annuli
/// (selected by |y|^2, clamped to the outer ring at the boundary) crossed
/// with uniform angular bins. Throws std::domain_error when |y| > radius.
int sector_index(const UnifiedPoint &y, double radius, int n_annuli, int n_sectors);

struct RadiusUpdate {
  double radius = 0;
  bool tested = false;
  bool rejected = false;
  double statistic = 0;
  double critical = 0;
};

/// Per-pixel gather state: the current kernel disk, its per-sector streaming
/// moments pooled across iterations, and the count t of iterations the
/// current radius has been held. The nominal sample count per sector is t*J.
///
/// The gather point moves every iteration (eye paths are jittered); samples
/// still pool because they are all expressed in plane coordinates.
class GatherRegion {
public:
  GatherRegion(const TestConfig &test, const RadiusSchedule &schedule,
               double initial_radius);

  /// New gather point for this iteration; keeps the pooled statistics.
  void move_to(const Point3 &center, const Normal3 &normal);

  void accumulate(const ContributionSample &sample);

  /// F-test policy, run after iteration i (1-based) with J samples nominal
  /// per iteration. In rgb mode any channel rejecting rejects.
  RadiusUpdate end_iteration(std::uint64_t i, std::uint64_t samples_per_iteration);

  /// Photon-count chi-squared policy (counts vs. uniform expectation).
  RadiusUpdate chi2_end_iteration(std::uint64_t i, std::uint64_t samples_per_iteration);

  /// Fixed-schedule policy: radius_i = r_1 * sqrt(i^(alpha-1)), no testing.
  RadiusUpdate schedule_end_iteration(std::uint64_t i);

  double radius() const { return radius_; }
  double initial_radius() const { return initial_radius_; }
  std::uint64_t held_iterations() const { return t_; }
  const Point3 &center() const { return center_; }
  const TangentFrame &frame() const { return frame_; }
  int sector_count() const { return n_sectors_total_; }
  int channel_count() const { return channels_; }
  std::span<const SectorStats> sector_stats(int channel) const;

private:
  RadiusUpdate apply_decision(bool reject, std::uint64_t i);

  TestConfig test_;
  RadiusSchedule schedule_;
  double initial_radius_;
  double radius_;
  std::uint64_t t_ = 1;
  int n_sectors_total_;
  int channels_;
  Point3 center_;
  TangentFrame frame_{};
  double chi2_critical_ = -1; // lazily solved, constant per region
  std::vector<SectorStats> stats_; // [channel][sector], row-major
};

} // namespace fppm
