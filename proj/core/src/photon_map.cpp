#include "fppm/photon_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fppm {
namespace {

// 21 signed bits per axis, biased to unsigned; plenty for desk-scale scenes.
constexpr std::int64_t kBias = 1 << 20;

std::int64_t cell_coord(double x, double inv_cell) {
  return static_cast<std::int64_t>(std::floor(x * inv_cell));
}

} // namespace

std::uint64_t PhotonGrid::cell_key(std::int64_t ix, std::int64_t iy,
                                   std::int64_t iz) const {
  return (static_cast<std::uint64_t>(ix + kBias) << 42) |
         (static_cast<std::uint64_t>(iy + kBias) << 21) |
         static_cast<std::uint64_t>(iz + kBias);
}

PhotonGrid::PhotonGrid(std::vector<LightVertex> vertices, double cell_size)
    : vertices_(std::move(vertices)), cell_size_(cell_size) {
  if (!(cell_size > 0.0))
    throw std::invalid_argument("PhotonGrid: cell size must be positive");
  const double inv = 1.0 / cell_size_;

  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(vertices_.size());
  for (std::uint32_t i = 0; i < vertices_.size(); ++i) {
    const Point3& p = vertices_[i].position;
    keyed[i] = {cell_key(cell_coord(p.x, inv), cell_coord(p.y, inv),
                         cell_coord(p.z, inv)),
                i};
  }
  // Pairs sort by key then by index, which keeps insertion order per cell.
  std::sort(keyed.begin(), keyed.end());

  order_.resize(keyed.size());
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    order_[i] = keyed[i].second;
    if (i == 0 || keyed[i].first != keyed[i - 1].first) {
      keys_.push_back(keyed[i].first);
      cells_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i)});
    }
    cells_.back().end = static_cast<std::uint32_t>(i + 1);
  }
}

void PhotonGrid::query_ball(const Point3& center, double r,
                            std::vector<std::uint32_t>& out) const {
  out.clear();
  if (vertices_.empty()) return;
  if (r > cell_size_)
    throw std::invalid_argument("PhotonGrid: query radius exceeds cell size");
  const double inv = 1.0 / cell_size_;
  const double r2 = r * r;
  const std::int64_t cx = cell_coord(center.x, inv);
  const std::int64_t cy = cell_coord(center.y, inv);
  const std::int64_t cz = cell_coord(center.z, inv);

  for (std::int64_t dx = -1; dx <= 1; ++dx)
    for (std::int64_t dy = -1; dy <= 1; ++dy)
      for (std::int64_t dz = -1; dz <= 1; ++dz) {
        const std::uint64_t key = cell_key(cx + dx, cy + dy, cz + dz);
        const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
        if (it == keys_.end() || *it != key) continue;
        const Cell& cell = cells_[static_cast<std::size_t>(it - keys_.begin())];
        for (std::uint32_t i = cell.begin; i < cell.end; ++i) {
          const std::uint32_t v = order_[i];
          if (length_squared(vertices_[v].position - center) <= r2)
            out.push_back(v);
        }
      }
}

} // namespace fppm
