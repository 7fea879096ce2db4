#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fppm/vec.hpp"

namespace fppm {

/// Raw image payload: row-major, top-left origin.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  Rgb &at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgb &at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
};

/// Accumulates per-iteration radiance estimates as an unweighted running mean,
/// plus the auxiliary channels the progressive algorithms expose: the current
/// kernel radius per pixel and the cumulative split between connection-type
/// and merge-type contributions.
class Film {
public:
  Film() = default;
  Film(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint64_t iterations() const { return iterations_; }

  /// Adds one iteration's per-pixel estimates (size must be width*height).
  void add_iteration(std::span<const Rgb> estimate);

  /// Adds to the cumulative connection/merge luminance of one pixel.
  void add_split(std::size_t pixel, double vc_luminance, double vm_luminance);

  void set_radius_channel(std::span<const double> radius);

  Rgb mean(std::size_t pixel) const;
  Image image() const;

  /// Kernel radii as grayscale, r_min -> 0 and r_1 -> 1, linearly in between.
  Image radius_image(double r_min, double r_1) const;
  /// Fraction of each pixel's luminance delivered by connections (resp. merges).
  Image vc_share_image() const;
  Image vm_share_image() const;
  /// Per-pixel squared error of the current mean against a reference.
  Image squared_error_image(const Image &reference) const;

  double vc_total(std::size_t pixel) const { return vc_lum_[pixel]; }
  double vm_total(std::size_t pixel) const { return vm_lum_[pixel]; }

private:
  int width_ = 0, height_ = 0;
  std::uint64_t iterations_ = 0;
  std::vector<Rgb> sum_;
  std::vector<double> radius_;
  std::vector<double> vc_lum_;
  std::vector<double> vm_lum_;
};

/// PFM, color, little-endian, rows stored bottom-to-top. Header is exactly
/// "PF\n{w} {h}\n-1.0\n". Values round-trip bit-identically as float32.
void write_pfm(const std::string &path, const Image &image);
Image read_pfm(const std::string &path);

/// Mean squared error over pixels and channels, reported on the 0..255 scale
/// (factor 255^2) while the inputs stay linear.
double mse(const Image &a, const Image &b);

/// Least-squares slope of log(mse) against log(iteration).
/// Points with non-finite or non-positive mse are skipped.
double fit_convergence_slope(std::span<const std::uint64_t> iterations,
                             std::span<const double> mse_values,
                             std::uint64_t from, std::uint64_t to);

struct ConvergenceRow {
  std::uint64_t iteration = 0;
  double seconds = 0;
  double mse = 0;
  double mean_radius = 0;
  double vm_share = 0;
};

void write_convergence_csv(const std::string &path,
                           std::span<const ConvergenceRow> rows);
std::vector<ConvergenceRow> read_convergence_csv(const std::string &path);

} // namespace fppm
