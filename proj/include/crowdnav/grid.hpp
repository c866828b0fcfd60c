#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdnav/geometry.hpp"

namespace crowdnav {

enum class Cell : std::uint8_t { free, occupied };

struct CellIndex {
  int row = 0;
  int col = 0;
  constexpr bool operator==(const CellIndex&) const = default;
  constexpr auto operator<=>(const CellIndex&) const = default;
};

class MapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Static occupancy map. Row 0 is the row nearest the origin (smallest y);
/// column 0 the smallest x. Cells outside the grid read as occupied.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, Vec2 origin, std::vector<Cell> cells);

  /// Builds a grid from text rows where '#' is occupied and anything else is
  /// free. The first row of text is the top of the map (largest y).
  static OccupancyGrid from_rows(const std::vector<std::string>& rows, double resolution,
                                 Vec2 origin = {});

  /// Loads a map file (YAML: schema, resolution, char_size, origin, rows).
  static OccupancyGrid load(const std::filesystem::path& path);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  Vec2 origin() const { return origin_; }
  std::size_t cell_count() const { return cells_.size(); }
  const std::vector<Cell>& cells() const { return cells_; }

  bool in_bounds(CellIndex c) const {
    return c.row >= 0 && c.col >= 0 && c.row < height_ && c.col < width_;
  }
  std::size_t flat(CellIndex c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }
  CellIndex unflat(std::size_t i) const {
    return {static_cast<int>(i / static_cast<std::size_t>(width_)),
            static_cast<int>(i % static_cast<std::size_t>(width_))};
  }
  bool occupied(CellIndex c) const { return !in_bounds(c) || cells_[flat(c)] == Cell::occupied; }
  void set(CellIndex c, Cell v) { cells_.at(flat(c)) = v; }

  CellIndex cell_of(Vec2 p) const;
  Vec2 center_of(CellIndex c) const;
  bool contains(Vec2 p) const { return in_bounds(cell_of(p)); }

  /// True when every border cell is occupied.
  bool is_closed() const;

  /// Whether a disc intersects any occupied cell square (touching does not count).
  bool disc_hits_obstacle(Vec2 center, double radius) const;

  /// Closest point on the occupied set within `cutoff` of `p`, if any.
  /// Returns false when nothing occupied lies within the cutoff.
  bool nearest_obstacle_point(Vec2 p, double cutoff, Vec2& out) const;

  /// Distance along the unit direction `dir` from `origin` to the boundary of
  /// the first occupied cell, or `max_range` if none is hit before it. Zero
  /// when the origin itself is in an occupied cell.
  double raycast(Vec2 origin, Vec2 dir, double max_range) const;

  /// Cells crossed by the segment a-b in order, from cell_of(a) to cell_of(b).
  std::vector<CellIndex> segment_cells(Vec2 a, Vec2 b) const;

  /// True when the straight segment a-b crosses no occupied cell.
  bool line_of_sight(Vec2 a, Vec2 b) const;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  Vec2 origin_{};
  std::vector<Cell> cells_;
};

}  // namespace crowdnav
