#pragma once

#include <cstdint>
#include <vector>

#include "fppm/path.hpp"
#include "fppm/vec.hpp"

namespace fppm {

/// Uniform hash grid over one iteration's light vertices. Cell size bounds
/// the query radius, so a ball query only ever touches the 27 cells around
/// the center. Queries visit cells in a fixed order and vertices in
/// insertion order, which keeps gather results reproducible.
class PhotonGrid {
public:
  PhotonGrid() = default;
  PhotonGrid(std::vector<LightVertex> vertices, double cell_size);

  std::size_t size() const { return vertices_.size(); }
  const std::vector<LightVertex>& vertices() const { return vertices_; }
  double cell_size() const { return cell_size_; }

  /// Indices of stored vertices with |pos - center| <= r (closed ball).
  /// Throws std::invalid_argument when r exceeds the cell size.
  void query_ball(const Point3& center, double r,
                  std::vector<std::uint32_t>& out) const;

private:
  struct Cell {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
  };

  std::uint64_t cell_key(std::int64_t ix, std::int64_t iy, std::int64_t iz) const;

  std::vector<LightVertex> vertices_;
  std::vector<std::uint32_t> order_;  // vertex indices grouped by cell
  std::vector<std::uint64_t> keys_;   // sorted cell keys, parallel to cells_
  std::vector<Cell> cells_;           // ranges into order_
  double cell_size_ = 0.0;
};

} // namespace fppm
