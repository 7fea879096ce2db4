#include "fppm/film.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fppm {

Film::Film(int width, int height) : width_(width), height_(height) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  sum_.resize(n);
  radius_.resize(n, 0.0);
  vc_lum_.resize(n, 0.0);
  vm_lum_.resize(n, 0.0);
}

void Film::add_iteration(std::span<const Rgb> estimate) {
  assert(estimate.size() == sum_.size());
  for (std::size_t i = 0; i < sum_.size(); ++i)
    sum_[i] += estimate[i];
  ++iterations_;
}

void Film::add_split(std::size_t pixel, double vc_luminance, double vm_luminance) {
  vc_lum_[pixel] += vc_luminance;
  vm_lum_[pixel] += vm_luminance;
}

void Film::set_radius_channel(std::span<const double> radius) {
  assert(radius.size() == radius_.size());
  std::copy(radius.begin(), radius.end(), radius_.begin());
}

Rgb Film::mean(std::size_t pixel) const {
  if (iterations_ == 0)
    return {};
  return sum_[pixel] / static_cast<double>(iterations_);
}

Image Film::image() const {
  Image img{width_, height_, {}};
  img.pixels.resize(sum_.size());
  for (std::size_t i = 0; i < sum_.size(); ++i)
    img.pixels[i] = mean(i);
  return img;
}

Image Film::radius_image(double r_min, double r_1) const {
  Image img{width_, height_, {}};
  img.pixels.resize(radius_.size());
  const double span = r_1 - r_min;
  for (std::size_t i = 0; i < radius_.size(); ++i) {
    const double g = span > 0 ? (radius_[i] - r_min) / span : 0.0;
    img.pixels[i] = Rgb(g);
  }
  return img;
}

Image Film::vc_share_image() const {
  Image img{width_, height_, {}};
  img.pixels.resize(vc_lum_.size());
  for (std::size_t i = 0; i < vc_lum_.size(); ++i) {
    const double total = vc_lum_[i] + vm_lum_[i];
    img.pixels[i] = Rgb(total > 0 ? vc_lum_[i] / total : 0.0);
  }
  return img;
}

Image Film::vm_share_image() const {
  Image img{width_, height_, {}};
  img.pixels.resize(vm_lum_.size());
  for (std::size_t i = 0; i < vm_lum_.size(); ++i) {
    const double total = vc_lum_[i] + vm_lum_[i];
    img.pixels[i] = Rgb(total > 0 ? vm_lum_[i] / total : 0.0);
  }
  return img;
}

Image Film::squared_error_image(const Image &reference) const {
  if (reference.width != width_ || reference.height != height_)
    throw std::invalid_argument("squared_error_image: size mismatch");
  Image img{width_, height_, {}};
  img.pixels.resize(sum_.size());
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    const Rgb d = mean(i) - reference.pixels[i];
    img.pixels[i] = d * d;
  }
  return img;
}

void write_pfm(const std::string &path, const Image &image) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path);
  out << "PF\n" << image.width << " " << image.height << "\n-1.0\n";
  // Negative scale in the header means little-endian payload, which is what
  // the float casts below produce on every platform this builds on.
  std::vector<float> row(static_cast<std::size_t>(image.width) * 3);
  for (int y = image.height - 1; y >= 0; --y) {
    for (int x = 0; x < image.width; ++x) {
      const Rgb &p = image.at(x, y);
      row[3 * x + 0] = static_cast<float>(p.r);
      row[3 * x + 1] = static_cast<float>(p.g);
      row[3 * x + 2] = static_cast<float>(p.b);
    }
    out.write(reinterpret_cast<const char *>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out)
    throw std::runtime_error("short write: " + path);
}

Image read_pfm(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open for reading: " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic != "PF")
    throw std::runtime_error(path + ": not a color PFM (header '" + magic + "')");
  std::string dims;
  std::getline(in, dims);
  int w = 0, h = 0;
  if (std::sscanf(dims.c_str(), "%d %d", &w, &h) != 2 || w <= 0 || h <= 0)
    throw std::runtime_error(path + ": bad PFM dimensions '" + dims + "'");
  std::string scale_line;
  std::getline(in, scale_line);
  const double scale = std::atof(scale_line.c_str());
  if (scale >= 0)
    throw std::runtime_error(path + ": big-endian PFM not supported");

  Image img{w, h, {}};
  img.pixels.resize(static_cast<std::size_t>(w) * h);
  std::vector<float> row(static_cast<std::size_t>(w) * 3);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char *>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in)
      throw std::runtime_error(path + ": truncated PFM payload");
    for (int x = 0; x < w; ++x)
      img.at(x, y) = {row[3 * x + 0], row[3 * x + 1], row[3 * x + 2]};
  }
  return img;
}

double mse(const Image &a, const Image &b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("mse: image size mismatch");
  double sum = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const Rgb d = a.pixels[i] - b.pixels[i];
    sum += d.r * d.r + d.g * d.g + d.b * d.b;
  }
  return 255.0 * 255.0 * sum / (3.0 * static_cast<double>(a.pixels.size()));
}

double fit_convergence_slope(std::span<const std::uint64_t> iterations,
                             std::span<const double> mse_values,
                             std::uint64_t from, std::uint64_t to) {
  if (iterations.size() != mse_values.size())
    throw std::invalid_argument("fit_convergence_slope: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < iterations.size(); ++i) {
    if (iterations[i] < from || iterations[i] > to)
      continue;
    if (!(mse_values[i] > 0) || !std::isfinite(mse_values[i]))
      continue;
    const double x = std::log(static_cast<double>(iterations[i]));
    const double y = std::log(mse_values[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  if (n < 2)
    throw std::invalid_argument("fit_convergence_slope: fewer than 2 usable points");
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  return (static_cast<double>(n) * sxy - sx * sy) / denom;
}

void write_convergence_csv(const std::string &path,
                           std::span<const ConvergenceRow> rows) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path);
  out << "iteration,seconds,mse,mean_radius,vm_share\n";
  char buf[256];
  for (const ConvergenceRow &r : rows) {
    std::snprintf(buf, sizeof(buf), "%llu,%.9g,%.9g,%.9g,%.9g\n",
                  static_cast<unsigned long long>(r.iteration), r.seconds, r.mse,
                  r.mean_radius, r.vm_share);
    out << buf;
  }
}

std::vector<ConvergenceRow> read_convergence_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "iteration,seconds,mse,mean_radius,vm_share")
    throw std::runtime_error(path + ": unexpected CSV header");
  std::vector<ConvergenceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    ConvergenceRow r;
    unsigned long long iter = 0;
    if (std::sscanf(line.c_str(), "%llu,%lf,%lf,%lf,%lf", &iter, &r.seconds,
                    &r.mse, &r.mean_radius, &r.vm_share) != 5)
      throw std::runtime_error(path + ": bad CSV row '" + line + "'");
    r.iteration = iter;
    rows.push_back(r);
  }
  return rows;
}

} // namespace fppm
