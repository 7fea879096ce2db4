#include "fppm/gather.hpp"

#include <cmath>
#include <stdexcept>

#include "fppm/sampling.hpp"
#include "fppm/special_functions.hpp"

namespace fppm {

double schedule_radius(double base, double alpha, std::uint64_t i) {
  return base * std::sqrt(std::pow(static_cast<double>(i), alpha - 1.0));
}

int sector_index(const UnifiedPoint &y, double radius, int n_annuli, int n_sectors) {
  if (n_annuli < 1 || n_sectors < 1)
    throw std::invalid_argument("sector_index requires positive bin counts");
  const double r2 = radius * radius;
  const double d2 = y.u * y.u + y.v * y.v;
  if (d2 > r2 * (1.0 + 1e-9))
    throw std::domain_error("sector_index: point outside the kernel disk");

  int a = static_cast<int>(static_cast<double>(n_annuli) * d2 / r2);
  a = std::min(a, n_annuli - 1);

  double theta = std::atan2(y.v, y.u);
  if (theta < 0.0)
    theta += kTwoPi;
  int s = static_cast<int>(static_cast<double>(n_sectors) * theta / kTwoPi);
  s = std::min(s, n_sectors - 1);

  return a * n_sectors + s;
}

GatherRegion::GatherRegion(const TestConfig &test, const RadiusSchedule &schedule,
                           double initial_radius)
    : test_(test), schedule_(schedule), initial_radius_(initial_radius),
      radius_(initial_radius),
      n_sectors_total_(test.n_annuli * test.n_sectors),
      channels_(test.channels == TestChannels::rgb ? 3 : 1) {
  if (!(initial_radius > 0))
    throw std::invalid_argument("GatherRegion requires a positive initial radius");
  if (!(schedule.k > 0 && schedule.k < 1))
    throw std::invalid_argument("RadiusSchedule requires k in (0,1)");
  if (!(schedule.alpha >= 0.5 && schedule.alpha < 1))
    throw std::invalid_argument("RadiusSchedule requires alpha in [0.5,1)");
  if (!(schedule.r_min_base > 0 && schedule.r_min_base <= initial_radius))
    throw std::invalid_argument("RadiusSchedule requires 0 < r_min_base <= r_1");
  if (n_sectors_total_ < 2)
    throw std::invalid_argument("GatherRegion requires at least 2 sectors");
  stats_.resize(static_cast<std::size_t>(channels_) * n_sectors_total_);
}

void GatherRegion::move_to(const Point3 &center, const Normal3 &normal) {
  center_ = center;
  frame_ = build_tangent_frame(normal);
}

void GatherRegion::accumulate(const ContributionSample &sample) {
  const int sector = sector_index(sample.y, radius_, test_.n_annuli, test_.n_sectors);
  if (channels_ == 1) {
    stats_[sector].add(luminance(sample.value));
  } else {
    for (int c = 0; c < 3; ++c)
      stats_[static_cast<std::size_t>(c) * n_sectors_total_ + sector].add(sample.value[c]);
  }
}

std::span<const SectorStats> GatherRegion::sector_stats(int channel) const {
  return {stats_.data() + static_cast<std::size_t>(channel) * n_sectors_total_,
          static_cast<std::size_t>(n_sectors_total_)};
}

RadiusUpdate GatherRegion::apply_decision(bool reject, std::uint64_t i) {
  RadiusUpdate up;
  up.rejected = reject;
  if (reject) {
    radius_ = std::max(schedule_.k * radius_,
                       schedule_radius(schedule_.r_min_base, schedule_.alpha, i + 1));
    for (SectorStats &s : stats_)
      s.clear();
    t_ = 1;
  } else {
    ++t_;
  }
  up.radius = radius_;
  return up;
}

RadiusUpdate GatherRegion::end_iteration(std::uint64_t i,
                                         std::uint64_t samples_per_iteration) {
  if (test_.override_decision != TestOverride::none)
    return apply_decision(test_.override_decision == TestOverride::always_reject, i);

  const std::uint64_t m = t_ * samples_per_iteration;
  if (m < 2)
    return apply_decision(false, i);

  bool reject = false;
  double stat = 0, critical = 0;
  for (int c = 0; c < channels_; ++c) {
    const FTestResult r = anova_f_test(sector_stats(c), m, test_.alpha_f);
    reject = reject || r.reject;
    stat = std::max(stat, r.f);
    critical = r.critical;
  }
  RadiusUpdate up = apply_decision(reject, i);
  up.tested = true;
  up.statistic = stat;
  up.critical = critical;
  return up;
}

RadiusUpdate GatherRegion::chi2_end_iteration(std::uint64_t i, std::uint64_t) {
  if (test_.override_decision != TestOverride::none)
    return apply_decision(test_.override_decision == TestOverride::always_reject, i);

  std::vector<std::uint64_t> counts(static_cast<std::size_t>(n_sectors_total_));
  std::uint64_t total = 0;
  for (int s = 0; s < n_sectors_total_; ++s) {
    counts[s] = stats_[s].count;
    total += counts[s];
  }
  if (total == 0)
    return apply_decision(false, i);

  if (chi2_critical_ < 0)
    chi2_critical_ = chi2_quantile(1.0 - test_.alpha_chi2,
                                   static_cast<double>(n_sectors_total_ - 1));
  const double stat = chi2_statistic(counts);
  RadiusUpdate up = apply_decision(stat > chi2_critical_, i);
  up.tested = true;
  up.statistic = stat;
  up.critical = chi2_critical_;
  return up;
}

RadiusUpdate GatherRegion::schedule_end_iteration(std::uint64_t i) {
  RadiusUpdate up;
  radius_ = schedule_radius(initial_radius_, schedule_.alpha, i + 1);
  ++t_;
  up.radius = radius_;
  return up;
}

} // namespace fppm
